#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "powlgen/llm/chat.hpp"
#include "powlgen/llm/generation.hpp"
#include "powlgen/model.hpp"

namespace powlgen::studio {

/// Error carrying the HTTP status and JSON body to return.
class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& message, nlohmann::json extra = nlohmann::json::object());
  int status() const { return status_; }
  const nlohmann::json& body() const { return body_; }

 private:
  int status_;
  nlohmann::json body_;
};

struct ServiceConfig {
  std::string data_dir = "studio-data";
  std::vector<llm::ProviderConfig> providers;  // selectable by name
  std::string default_provider;                // used when a request names none
  llm::GenerationConfig generation;
  std::string cors_origin = "*";
  int output_retry_limit = 5;

  /// POWLGEN_STUDIO_DATA_DIR, POWLGEN_STUDIO_PROVIDERS (provider file),
  /// POWLGEN_STUDIO_DEFAULT_PROVIDER, POWLGEN_STUDIO_CORS_ORIGIN.
  static ServiceConfig from_env();
};

struct ModelVersion {
  int version = 1;
  std::string kind;      // "generate", "feedback" or "optimize"
  std::string feedback;  // feedback text for kind == "feedback"
  std::string created;
  Model model;
  std::vector<llm::IterationRecord> iterations;  // the attempts that produced this version
  llm::SessionStatus status = llm::SessionStatus::succeeded;
};

struct SessionRecord {
  std::string id;
  std::string provider;    // provider config name or vendor kind
  std::string model_name;  // overrides the provider's model when non-empty
  std::string created;
  std::string updated;
  llm::GenerationSession session;  // latest successful state, conversation included
  std::vector<ModelVersion> versions;
};

nlohmann::json record_to_json(const SessionRecord& r);
/// Revalidates every stored model; throws std::runtime_error on an invalid one.
SessionRecord record_from_json(const nlohmann::json& j);

/// One JSON file per session, replaced atomically (write to a temporary file, then rename).
class SessionStore {
 public:
  explicit SessionStore(std::string dir);
  void save(const SessionRecord& r) const;
  std::optional<SessionRecord> load(const std::string& id) const;
  std::vector<std::string> list() const;
  const std::string& dir() const { return dir_; }

 private:
  std::string path(const std::string& id) const;
  std::string dir_;
};

struct Document {
  std::string body;
  std::string content_type;
  std::string filename;
};

/// Model JSON plus the derived BPMN graph the UI draws.
nlohmann::json model_view(const Model& model);

class Service {
 public:
  using ProviderFactory = std::function<std::unique_ptr<llm::ChatProvider>(const llm::ProviderConfig&)>;

  explicit Service(ServiceConfig config, ProviderFactory factory = {});

  /// Bodies are the request JSON; api_key comes from the X-API-Key header.
  nlohmann::json create_session(const nlohmann::json& body, const std::optional<std::string>& api_key = {});
  nlohmann::json feedback(const std::string& id, const nlohmann::json& body,
                          const std::optional<std::string>& api_key = {});
  nlohmann::json optimize(const std::string& id, const std::optional<std::string>& api_key = {});
  nlohmann::json history(const std::string& id) const;
  nlohmann::json list_sessions() const;
  nlohmann::json providers() const;
  /// format: bpmn, pnml, script, dot or json. version 0 selects the latest.
  Document export_model(const std::string& id, const std::string& format, int version = 0) const;

  const ServiceConfig& config() const { return config_; }

 private:
  llm::ProviderConfig resolve_provider(const std::string& name, const std::string& model_name,
                                       const std::optional<std::string>& api_key) const;
  std::shared_ptr<std::mutex> session_lock(const std::string& id);
  SessionRecord load_or_404(const std::string& id) const;
  std::string new_id();

  ServiceConfig config_;
  ProviderFactory factory_;
  SessionStore store_;
  std::mutex locks_mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

/// OpenAPI 3 description of the REST interface.
nlohmann::json openapi_spec();

}  // namespace powlgen::studio

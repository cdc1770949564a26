#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace powlgen::llm {

enum class Role { system, user, assistant };

std::string_view role_name(Role r);
Role role_from_name(std::string_view name);

struct ChatMessage {
  Role role = Role::user;
  std::string content;  // never empty

  bool operator==(const ChatMessage&) const = default;
};

ChatMessage make_message(Role role, std::string content);

using Conversation = std::vector<ChatMessage>;

/// Network failure, non-2xx status, or an unusable response body.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ProviderKind { mock, echo, openai, anthropic, google };

std::string_view provider_kind_name(ProviderKind k);
ProviderKind provider_kind_from_name(std::string_view name);

struct ProviderConfig {
  std::string name;  // display name used in reports
  ProviderKind kind = ProviderKind::mock;
  std::string endpoint;
  std::string model;
  std::string api_key_env;  // name of the environment variable, not the key
  double timeout_seconds = 120.0;
  int max_retries = 2;
  int max_concurrency = 4;
  std::vector<std::string> script;  // mock responses
  std::optional<std::string> api_key;  // per-request key; takes precedence over api_key_env, never serialized
};

/// Accepts "script" as an inline array or a path to a JSON array file
/// (resolved against base_dir). Throws std::invalid_argument on bad input.
ProviderConfig provider_config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
nlohmann::json provider_config_to_json(const ProviderConfig& c);
std::vector<ProviderConfig> load_provider_configs(const std::string& path);

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  /// Returns the assistant text. Throws TransportError.
  virtual std::string complete(const Conversation& messages) = 0;
  virtual std::string name() const = 0;
};

/// Replays a fixed script. The last response repeats once the script is
/// exhausted. The literal "!transport_error" raises TransportError instead.
class MockProvider : public ChatProvider {
 public:
  explicit MockProvider(std::vector<std::string> script, std::string name = "mock");

  std::string complete(const Conversation& messages) override;
  std::string name() const override { return name_; }

  std::vector<Conversation> requests() const;
  std::size_t calls() const;

 private:
  std::vector<std::string> script_;
  std::string name_;
  mutable std::mutex mu_;
  std::size_t next_ = 0;
  std::vector<Conversation> requests_;
};

/// Answers with the content of the last user message.
class EchoProvider : public ChatProvider {
 public:
  std::string complete(const Conversation& messages) override;
  std::string name() const override { return "echo"; }
};

/// Chat-completion over HTTPS with per-vendor request shaping.
class HttpProvider : public ChatProvider {
 public:
  explicit HttpProvider(ProviderConfig config);

  std::string complete(const Conversation& messages) override;
  std::string name() const override { return config_.name; }

  /// Request body for the configured vendor (exposed for tests).
  nlohmann::json request_body(const Conversation& messages) const;
  /// Extracts the assistant text from a vendor response. Throws TransportError.
  std::string parse_response(const nlohmann::json& body) const;

 private:
  ProviderConfig config_;
};

std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config);

}  // namespace powlgen::llm

#include "powlgen/llm/chat.hpp"

#include <filesystem>
#include <fstream>

namespace powlgen::llm {

namespace {

constexpr std::string_view kTransportMarker = "!transport_error";

}  // namespace

std::string_view role_name(Role r) {
  switch (r) {
    case Role::system:
      return "system";
    case Role::user:
      return "user";
    case Role::assistant:
      return "assistant";
  }
  return "user";
}

Role role_from_name(std::string_view name) {
  if (name == "system") return Role::system;
  if (name == "user") return Role::user;
  if (name == "assistant") return Role::assistant;
  throw std::invalid_argument("unknown role: " + std::string(name));
}

ChatMessage make_message(Role role, std::string content) {
  if (content.empty()) throw std::invalid_argument("chat message content must not be empty");
  return {role, std::move(content)};
}

std::string_view provider_kind_name(ProviderKind k) {
  switch (k) {
    case ProviderKind::mock:
      return "mock";
    case ProviderKind::echo:
      return "echo";
    case ProviderKind::openai:
      return "openai";
    case ProviderKind::anthropic:
      return "anthropic";
    case ProviderKind::google:
      return "google";
  }
  return "mock";
}

ProviderKind provider_kind_from_name(std::string_view name) {
  for (auto k : {ProviderKind::mock, ProviderKind::echo, ProviderKind::openai, ProviderKind::anthropic,
                 ProviderKind::google})
    if (provider_kind_name(k) == name) return k;
  throw std::invalid_argument("unknown provider kind: " + std::string(name));
}

ProviderConfig provider_config_from_json(const nlohmann::json& j, const std::string& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("provider config must be an object");
  ProviderConfig c;
  c.kind = provider_kind_from_name(j.value("kind", std::string("mock")));
  c.name = j.value("name", std::string(provider_kind_name(c.kind)));
  c.endpoint = j.value("endpoint", std::string());
  c.model = j.value("model", std::string());
  c.api_key_env = j.value("api_key_env", std::string());
  c.timeout_seconds = j.value("timeout_seconds", 120.0);
  c.max_retries = j.value("max_retries", 2);
  c.max_concurrency = j.value("max_concurrency", 4);
  if (c.timeout_seconds <= 0) throw std::invalid_argument("provider '" + c.name + "': timeout must be > 0");
  if (c.max_retries < 0) throw std::invalid_argument("provider '" + c.name + "': max_retries must be >= 0");
  if (c.max_concurrency < 1) throw std::invalid_argument("provider '" + c.name + "': max_concurrency must be >= 1");
  if (j.contains("api_key")) throw std::invalid_argument("provider '" + c.name + "': use api_key_env, not api_key");
  if (j.contains("script")) {
    nlohmann::json script = j.at("script");
    if (script.is_string()) {
      std::filesystem::path p = script.get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      std::ifstream in(p);
      if (!in) throw std::invalid_argument("provider '" + c.name + "': cannot read script " + p.string());
      script = nlohmann::json::parse(in);
    }
    if (!script.is_array()) throw std::invalid_argument("provider '" + c.name + "': script must be an array");
    for (const auto& s : script) c.script.push_back(s.get<std::string>());
  }
  if (c.kind == ProviderKind::mock && c.script.empty())
    throw std::invalid_argument("provider '" + c.name + "': mock needs a non-empty script");
  return c;
}

nlohmann::json provider_config_to_json(const ProviderConfig& c) {
  nlohmann::json j{{"name", c.name},
                   {"kind", provider_kind_name(c.kind)},
                   {"endpoint", c.endpoint},
                   {"model", c.model},
                   {"api_key_env", c.api_key_env},
                   {"timeout_seconds", c.timeout_seconds},
                   {"max_retries", c.max_retries},
                   {"max_concurrency", c.max_concurrency}};
  if (!c.script.empty()) j["script"] = c.script;
  return j;
}

std::vector<ProviderConfig> load_provider_configs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read provider file " + path);
  auto j = nlohmann::json::parse(in);
  if (!j.is_array()) throw std::invalid_argument("provider file must hold a JSON array");
  const auto base = std::filesystem::path(path).parent_path().string();
  std::vector<ProviderConfig> out;
  for (const auto& e : j) out.push_back(provider_config_from_json(e, base.empty() ? "." : base));
  return out;
}

MockProvider::MockProvider(std::vector<std::string> script, std::string name)
    : script_(std::move(script)), name_(std::move(name)) {
  if (script_.empty()) throw std::invalid_argument("mock script is empty");
}

std::string MockProvider::complete(const Conversation& messages) {
  std::lock_guard lock(mu_);
  requests_.push_back(messages);
  const auto& reply = script_[std::min(next_, script_.size() - 1)];
  ++next_;
  if (reply == kTransportMarker) throw TransportError("scripted transport failure");
  return reply;
}

std::vector<Conversation> MockProvider::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::size_t MockProvider::calls() const {
  std::lock_guard lock(mu_);
  return requests_.size();
}

std::string EchoProvider::complete(const Conversation& messages) {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it)
    if (it->role == Role::user) return it->content;
  throw TransportError("echo: no user message");
}

std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config) {
  switch (config.kind) {
    case ProviderKind::mock:
      return std::make_unique<MockProvider>(config.script, config.name);
    case ProviderKind::echo:
      return std::make_unique<EchoProvider>();
    default:
      return std::make_unique<HttpProvider>(config);
  }
}

}  // namespace powlgen::llm

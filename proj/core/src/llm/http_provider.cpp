#include <cstdlib>
#include <regex>

#include <httplib.h>

#include "powlgen/llm/chat.hpp"

namespace powlgen::llm {

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw TransportError("invalid endpoint URL: " + url);
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

std::string default_endpoint(ProviderKind k) {
  switch (k) {
    case ProviderKind::openai:
      return "https://api.openai.com/v1/chat/completions";
    case ProviderKind::anthropic:
      return "https://api.anthropic.com/v1/messages";
    case ProviderKind::google:
      return "https://generativelanguage.googleapis.com/v1beta";
    default:
      return {};
  }
}

std::string api_key(const ProviderConfig& c) {
  if (c.api_key && !c.api_key->empty()) return *c.api_key;
  if (c.api_key_env.empty()) return {};
  const char* v = std::getenv(c.api_key_env.c_str());
  if (!v || !*v) throw TransportError("environment variable " + c.api_key_env + " is not set");
  return v;
}

}  // namespace

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) config_.endpoint = default_endpoint(config_.kind);
  if (config_.timeout_seconds <= 0) throw std::invalid_argument("timeout must be > 0");
}

nlohmann::json HttpProvider::request_body(const Conversation& messages) const {
  switch (config_.kind) {
    case ProviderKind::anthropic: {
      std::string system;
      auto msgs = nlohmann::json::array();
      for (const auto& m : messages) {
        if (m.role == Role::system) {
          system += (system.empty() ? "" : "\n\n") + m.content;
          continue;
        }
        msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
      }
      nlohmann::json body{{"model", config_.model}, {"max_tokens", 8192}, {"messages", msgs}};
      if (!system.empty()) body["system"] = system;
      return body;
    }
    case ProviderKind::google: {
      std::string system;
      auto contents = nlohmann::json::array();
      for (const auto& m : messages) {
        if (m.role == Role::system) {
          system += (system.empty() ? "" : "\n\n") + m.content;
          continue;
        }
        contents.push_back(
            {{"role", m.role == Role::assistant ? "model" : "user"}, {"parts", {{{"text", m.content}}}}});
      }
      nlohmann::json body{{"contents", contents}};
      if (!system.empty()) body["systemInstruction"] = {{"parts", {{{"text", system}}}}};
      return body;
    }
    default: {
      auto msgs = nlohmann::json::array();
      for (const auto& m : messages) msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
      return {{"model", config_.model}, {"messages", msgs}};
    }
  }
}

std::string HttpProvider::parse_response(const nlohmann::json& body) const {
  try {
    std::string text;
    switch (config_.kind) {
      case ProviderKind::anthropic:
        for (const auto& block : body.at("content"))
          if (block.value("type", std::string()) == "text") text += block.at("text").get<std::string>();
        break;
      case ProviderKind::google:
        for (const auto& part : body.at("candidates").at(0).at("content").at("parts"))
          if (part.contains("text")) text += part.at("text").get<std::string>();
        break;
      default:
        text = body.at("choices").at(0).at("message").at("content").get<std::string>();
    }
    return text;
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unexpected response body: ") + e.what());
  }
}

std::string HttpProvider::complete(const Conversation& messages) {
  const auto key = api_key(config_);
  httplib::Headers headers;
  std::string endpoint = config_.endpoint;
  switch (config_.kind) {
    case ProviderKind::anthropic:
      headers.emplace("x-api-key", key);
      headers.emplace("anthropic-version", "2023-06-01");
      break;
    case ProviderKind::google:
      endpoint += "/models/" + config_.model + ":generateContent";
      headers.emplace("x-goog-api-key", key);
      break;
    default:
      if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
  }
  const auto url = split_url(endpoint);
  const auto body = request_body(messages).dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    httplib::Client client(url.origin);
    const auto secs = static_cast<time_t>(config_.timeout_seconds);
    const auto usecs = static_cast<time_t>((config_.timeout_seconds - secs) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(url.path, headers, body, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500 || res->status == 429) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300)
      throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("response is not JSON: ") + e.what());
    }
    return parse_response(parsed);
  }
  throw TransportError(config_.name + ": " + last_error + " after " + std::to_string(config_.max_retries + 1) +
                       " attempts");
}

}  // namespace powlgen::llm

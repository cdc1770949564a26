#include "powlgen/studio/http_api.hpp"

#include <httplib.h>

namespace powlgen::studio {

namespace {

const char* kOpenApi = R"json({
  "openapi": "3.0.3",
  "info": {"title": "POWL studio service", "version": "1.0.0"},
  "components": {
    "parameters": {
      "SessionId": {"name": "id", "in": "path", "required": true, "schema": {"type": "string"}},
      "ApiKey": {"name": "X-API-Key", "in": "header", "required": false, "schema": {"type": "string"},
                 "description": "Provider API key for this request only; never stored."}
    },
    "schemas": {
      "Error": {"type": "object", "required": ["error"], "properties": {
        "error": {"type": "string"},
        "diagnostics": {"type": "array", "items": {"$ref": "#/components/schemas/Diagnostic"}}}},
      "Diagnostic": {"type": "object", "properties": {
        "code": {"type": "string"}, "severity": {"type": "string"},
        "message": {"type": "string"}, "path": {"type": "string"}}},
      "ModelView": {"type": "object", "properties": {
        "powl": {"type": "object"}, "graph": {"type": "object"},
        "script": {"type": "string"}, "stats": {"type": "object"}}},
      "VersionResponse": {"type": "object", "properties": {
        "session_id": {"type": "string"}, "version": {"type": "integer"},
        "status": {"type": "string", "enum": ["succeeded", "succeeded_with_autofix", "failed"]},
        "iterations": {"type": "integer"},
        "diagnostics": {"type": "array", "items": {"$ref": "#/components/schemas/Diagnostic"}},
        "model": {"$ref": "#/components/schemas/ModelView"}}}
    }
  },
  "paths": {
    "/spec": {"get": {"summary": "This document", "responses": {"200": {"description": "OpenAPI document"}}}},
    "/health": {"get": {"summary": "Liveness probe", "responses": {"200": {"description": "ok"}}}},
    "/providers": {"get": {"summary": "Configured providers", "responses": {"200": {"description": "Provider list"}}}},
    "/sessions": {
      "get": {"summary": "List session ids", "responses": {"200": {"description": "Session ids"}}},
      "post": {
        "summary": "Generate the initial model from a process description",
        "parameters": [{"$ref": "#/components/parameters/ApiKey"}],
        "requestBody": {"required": true, "content": {"application/json": {"schema": {
          "type": "object", "required": ["description"], "properties": {
            "description": {"type": "string"}, "provider": {"type": "string"}, "model_name": {"type": "string"}}}}}},
        "responses": {
          "200": {"description": "Session created", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/VersionResponse"}}}},
          "400": {"description": "Malformed request or unknown provider"},
          "409": {"description": "Generation failed", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Error"}}}},
          "422": {"description": "Empty description"},
          "502": {"description": "Provider failure"}}}},
    "/sessions/{id}": {
      "get": {"summary": "Version history with iteration timelines",
              "parameters": [{"$ref": "#/components/parameters/SessionId"}],
              "responses": {"200": {"description": "History"}, "404": {"description": "Unknown session"}}}},
    "/sessions/{id}/feedback": {
      "post": {"summary": "Refine the latest model with feedback",
               "parameters": [{"$ref": "#/components/parameters/SessionId"}, {"$ref": "#/components/parameters/ApiKey"}],
               "requestBody": {"required": true, "content": {"application/json": {"schema": {
                 "type": "object", "required": ["text"], "properties": {"text": {"type": "string"}}}}}},
               "responses": {
                 "200": {"description": "New version", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/VersionResponse"}}}},
                 "404": {"description": "Unknown session"}, "409": {"description": "Refinement failed"},
                 "422": {"description": "Empty feedback"}, "502": {"description": "Provider failure"}}}},
    "/sessions/{id}/optimize": {
      "post": {"summary": "Ask the provider to improve the latest model",
               "parameters": [{"$ref": "#/components/parameters/SessionId"}, {"$ref": "#/components/parameters/ApiKey"}],
               "responses": {"200": {"description": "New or unchanged version"}, "404": {"description": "Unknown session"},
                             "409": {"description": "OPTIMIZATION_FAILED"}}}},
    "/sessions/{id}/export": {
      "get": {"summary": "Download a model version",
              "parameters": [{"$ref": "#/components/parameters/SessionId"},
                {"name": "format", "in": "query", "required": true,
                 "schema": {"type": "string", "enum": ["bpmn", "pnml", "script", "dot", "bpmn-dot", "json"]}},
                {"name": "version", "in": "query", "required": false, "schema": {"type": "integer", "minimum": 1}}],
              "responses": {"200": {"description": "Document"}, "400": {"description": "Unknown format"},
                            "404": {"description": "Unknown session or version"}}}}
  }
})json";

std::optional<std::string> api_key(const httplib::Request& req) {
  auto v = req.get_header_value("X-API-Key");
  if (v.empty()) return std::nullopt;
  return v;
}

nlohmann::json json_body(const httplib::Request& req) {
  if (req.body.empty()) throw HttpError(400, "request body must be a JSON object");
  auto j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw HttpError(400, "request body must be a JSON object");
  return j;
}

void send_json(httplib::Response& res, int status, const nlohmann::json& j) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const HttpError& e) {
      send_json(res, e.status(), e.body());
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", e.what()}});
    }
  };
}

}  // namespace

nlohmann::json openapi_spec() { return nlohmann::json::parse(kOpenApi); }

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  explicit Impl(Service& s) : service(s) {}
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  auto& svc = impl_->service;
  const auto origin = svc.config().cors_origin;

  srv.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, X-API-Key");
    res.set_header("Access-Control-Expose-Headers", "Content-Disposition");
  });
  srv.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Get("/spec", guarded([](const httplib::Request&, httplib::Response& res) { send_json(res, 200, openapi_spec()); }));
  srv.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"status", "ok"}}); }));
  srv.Get("/providers",
          guarded([&svc](const httplib::Request&, httplib::Response& res) { send_json(res, 200, svc.providers()); }));
  srv.Get("/sessions",
          guarded([&svc](const httplib::Request&, httplib::Response& res) { send_json(res, 200, svc.list_sessions()); }));
  srv.Post("/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, svc.create_session(json_body(req), api_key(req)));
           }));
  srv.Get(R"(/sessions/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, svc.history(req.matches[1]));
          }));
  srv.Post(R"(/sessions/([^/]+)/feedback)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, svc.feedback(req.matches[1], json_body(req), api_key(req)));
           }));
  srv.Post(R"(/sessions/([^/]+)/optimize)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, svc.optimize(req.matches[1], api_key(req)));
           }));
  srv.Get(R"(/sessions/([^/]+)/export)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            const auto format = req.get_param_value("format");
            if (format.empty()) throw HttpError(400, "missing 'format' parameter");
            int version = 0;
            if (req.has_param("version")) {
              const auto v = req.get_param_value("version");
              std::size_t used = 0;
              try {
                version = std::stoi(v, &used);
              } catch (const std::exception&) {
                used = 0;
              }
              if (used != v.size() || version < 1) throw HttpError(400, "'version' must be a positive integer");
            }
            auto doc = svc.export_model(req.matches[1], format, version);
            res.set_header("Content-Disposition", "attachment; filename=\"" + doc.filename + "\"");
            res.set_content(doc.body, doc.content_type);
          }));
}

HttpServer::~HttpServer() = default;

bool HttpServer::mount_static(const std::string& dir) { return impl_->server.set_mount_point("/", dir); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace powlgen::studio

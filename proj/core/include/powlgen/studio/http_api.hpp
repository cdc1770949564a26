#pragma once

#include <memory>
#include <string>

#include "powlgen/studio/service.hpp"

namespace powlgen::studio {

/// REST front end for a Service.
///
///   GET  /spec                       OpenAPI description
///   GET  /health
///   GET  /providers
///   GET  /sessions
///   POST /sessions                   {description, provider, model_name}
///   GET  /sessions/{id}
///   POST /sessions/{id}/feedback     {text}
///   POST /sessions/{id}/optimize
///   GET  /sessions/{id}/export?format=bpmn|pnml|script|dot|json&version=n
///
/// An X-API-Key header overrides the provider's environment variable for one request.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Static files (the built UI) served under "/".
  bool mount_static(const std::string& dir);

  /// Blocks until stop().
  bool listen(const std::string& host, int port);
  /// Returns the chosen port, or -1.
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace powlgen::studio

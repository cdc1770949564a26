#include <csignal>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "powlgen/studio/http_api.hpp"

using namespace powlgen;

namespace {
studio::HttpServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Studio service: generate, refine and export process models over HTTP"};
  std::string host = "127.0.0.1", providers, data_dir, ui_dir, default_provider;
  int port = 8080;
  if (const char* p = std::getenv("POWLGEN_STUDIO_PORT")) port = std::atoi(p);
  if (const char* p = std::getenv("POWLGEN_STUDIO_UI_DIR")) ui_dir = p;
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port, "Also POWLGEN_STUDIO_PORT")->capture_default_str();
  app.add_option("--providers", providers, "Provider file (also POWLGEN_STUDIO_PROVIDERS)");
  app.add_option("--data-dir", data_dir, "Session directory (also POWLGEN_STUDIO_DATA_DIR)");
  app.add_option("--default-provider", default_provider, "Also POWLGEN_STUDIO_DEFAULT_PROVIDER");
  app.add_option("--ui", ui_dir, "Directory with the built UI (also POWLGEN_STUDIO_UI_DIR)");
  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = studio::ServiceConfig::from_env();
    if (!providers.empty()) {
      cfg.providers = llm::load_provider_configs(providers);
      if (default_provider.empty() && cfg.default_provider.empty() && !cfg.providers.empty())
        cfg.default_provider = cfg.providers.front().name;
    }
    if (!data_dir.empty()) cfg.data_dir = data_dir;
    if (!default_provider.empty()) cfg.default_provider = default_provider;

    studio::Service service(cfg);
    studio::HttpServer server(service);
    if (!ui_dir.empty() && !server.mount_static(ui_dir)) {
      std::cerr << "error: cannot serve " << ui_dir << "\n";
      return 1;
    }
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "listening on http://" << host << ":" << port << " (sessions in " << cfg.data_dir << ")\n";
    if (!server.listen(host, port)) {
      std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

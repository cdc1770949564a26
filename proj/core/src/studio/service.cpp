#include "powlgen/studio/service.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include "powlgen/bpmn.hpp"
#include "powlgen/dsl.hpp"
#include "powlgen/llm/self_improvement.hpp"
#include "powlgen/model_json.hpp"
#include "powlgen/petri_net.hpp"
#include "util.hpp"

namespace fs = std::filesystem;

namespace powlgen::studio {

namespace {

std::string now_iso() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

bool valid_id(const std::string& id) {
  static const std::regex re("[A-Za-z0-9_-]{1,64}");
  return std::regex_match(id, re);
}

nlohmann::json diagnostics_json(const std::vector<Diagnostic>& ds) {
  auto out = nlohmann::json::array();
  for (const auto& d : ds) out.push_back(diagnostic_to_json(d));
  return out;
}

nlohmann::json iterations_json(const std::vector<llm::IterationRecord>& its) {
  auto out = nlohmann::json::array();
  for (const auto& r : its) out.push_back(llm::iteration_to_json(r));
  return out;
}

bool transport_failure(const llm::GenerationSession& s) {
  for (const auto& d : s.last_diagnostics())
    if (d.code == DiagCode::transport_error) return true;
  return false;
}

nlohmann::json failure_body(const llm::GenerationSession& s) {
  return {{"status", llm::status_name(s.status)},
          {"diagnostics", diagnostics_json(s.last_diagnostics())},
          {"iterations", s.iteration_count()},
          {"timeline", iterations_json(s.iterations)}};
}

// Throws the HttpError matching an unsuccessful session.
[[noreturn]] void fail(const llm::GenerationSession& s) {
  if (transport_failure(s)) throw HttpError(502, "provider failure: " + s.failure_reason, failure_body(s));
  throw HttpError(409, "generation failed: " + s.failure_reason, failure_body(s));
}

std::string body_string(const nlohmann::json& body, const char* key) {
  if (!body.is_object()) throw HttpError(400, "request body must be a JSON object");
  if (!body.contains(key) || body.at(key).is_null()) return {};
  if (!body.at(key).is_string()) throw HttpError(400, std::string("'") + key + "' must be a string");
  return body.at(key).get<std::string>();
}

std::string default_key_env(llm::ProviderKind kind) {
  switch (kind) {
    case llm::ProviderKind::openai:
      return "OPENAI_API_KEY";
    case llm::ProviderKind::anthropic:
      return "ANTHROPIC_API_KEY";
    case llm::ProviderKind::google:
      return "GOOGLE_API_KEY";
    default:
      return {};
  }
}

}  // namespace

HttpError::HttpError(int status, const std::string& message, nlohmann::json extra)
    : std::runtime_error(message), status_(status), body_(std::move(extra)) {
  if (!body_.is_object()) body_ = nlohmann::json::object();
  body_["error"] = message;
}

ServiceConfig ServiceConfig::from_env() {
  ServiceConfig c;
  c.data_dir = env_or("POWLGEN_STUDIO_DATA_DIR", c.data_dir);
  const auto providers = env_or("POWLGEN_STUDIO_PROVIDERS", "");
  if (!providers.empty()) c.providers = llm::load_provider_configs(providers);
  c.default_provider = env_or("POWLGEN_STUDIO_DEFAULT_PROVIDER", c.providers.empty() ? "" : c.providers.front().name);
  c.cors_origin = env_or("POWLGEN_STUDIO_CORS_ORIGIN", c.cors_origin);
  return c;
}

// ---- persistence ----

nlohmann::json record_to_json(const SessionRecord& r) {
  auto versions = nlohmann::json::array();
  for (const auto& v : r.versions)
    versions.push_back({{"version", v.version},
                        {"kind", v.kind},
                        {"feedback", v.feedback},
                        {"created", v.created},
                        {"status", llm::status_name(v.status)},
                        {"model", model_to_json(v.model)},
                        {"iterations", iterations_json(v.iterations)}});
  return {{"id", r.id},
          {"provider", r.provider},
          {"model_name", r.model_name},
          {"created", r.created},
          {"updated", r.updated},
          {"session", llm::session_to_json(r.session)},
          {"versions", versions}};
}

SessionRecord record_from_json(const nlohmann::json& j) {
  SessionRecord r;
  r.id = j.at("id");
  r.provider = j.at("provider");
  r.model_name = j.value("model_name", std::string());
  r.created = j.at("created");
  r.updated = j.at("updated");
  r.session = llm::session_from_json(j.at("session"));
  for (const auto& v : j.at("versions")) {
    ModelVersion mv;
    mv.version = v.at("version");
    mv.kind = v.at("kind");
    mv.feedback = v.value("feedback", std::string());
    mv.created = v.at("created");
    mv.status = llm::status_from_name(v.at("status").get<std::string>());
    mv.model = model_from_json(v.at("model"));
    if (!validate(mv.model).is_valid())
      throw std::runtime_error("session " + r.id + ": stored model v" + std::to_string(mv.version) + " is invalid");
    for (const auto& it : v.at("iterations")) mv.iterations.push_back(llm::iteration_from_json(it));
    r.versions.push_back(std::move(mv));
  }
  if (r.versions.empty()) throw std::runtime_error("session " + r.id + " has no versions");
  return r;
}

SessionStore::SessionStore(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::string SessionStore::path(const std::string& id) const { return (fs::path(dir_) / (id + ".json")).string(); }

void SessionStore::save(const SessionRecord& r) const {
  std::ostringstream suffix;
  suffix << ".tmp." << std::this_thread::get_id();
  const auto target = path(r.id);
  const auto tmp = target + suffix.str();
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << record_to_json(r).dump(1) << "\n";
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp);
  }
  fs::rename(tmp, target);
}

std::optional<SessionRecord> SessionStore::load(const std::string& id) const {
  std::ifstream in(path(id));
  if (!in) return std::nullopt;
  return record_from_json(nlohmann::json::parse(in));
}

std::vector<std::string> SessionStore::list() const {
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir_))
    if (e.is_regular_file() && e.path().extension() == ".json") ids.push_back(e.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

// ---- views ----

nlohmann::json model_view(const Model& model) {
  const auto s = stats(model);
  return {{"powl", model_to_json(model)},
          {"graph", bpmn::graph_to_json(bpmn::to_bpmn(model))},
          {"script", dsl::render(model).source},
          {"stats",
           {{"activities", s.activities},
            {"silent", s.silents},
            {"choices", s.choices},
            {"loops", s.loops},
            {"partial_orders", s.partial_orders}}}};
}

namespace {

nlohmann::json version_json(const ModelVersion& v) {
  return {{"version", v.version},
          {"kind", v.kind},
          {"feedback", v.feedback},
          {"created", v.created},
          {"status", llm::status_name(v.status)},
          {"iteration_count", v.iterations.size()},
          {"iterations", iterations_json(v.iterations)},
          {"model", model_view(v.model)}};
}

ModelVersion make_version(int number, std::string kind, std::string feedback, const llm::GenerationSession& s,
                          std::size_t first_iteration) {
  ModelVersion v;
  v.version = number;
  v.kind = std::move(kind);
  v.feedback = std::move(feedback);
  v.created = now_iso();
  v.model = s.final_model;
  v.status = s.status;
  v.iterations.assign(s.iterations.begin() + static_cast<std::ptrdiff_t>(first_iteration), s.iterations.end());
  return v;
}

nlohmann::json version_response(const SessionRecord& r) {
  const auto& v = r.versions.back();
  return {{"session_id", r.id},
          {"version", v.version},
          {"status", llm::status_name(v.status)},
          {"iterations", v.iterations.size()},
          {"diagnostics", diagnostics_json(v.iterations.empty() ? std::vector<Diagnostic>{} : v.iterations.back().diagnostics)},
          {"model", model_view(v.model)}};
}

}  // namespace

// ---- service ----

Service::Service(ServiceConfig config, ProviderFactory factory)
    : config_(std::move(config)),
      factory_(factory ? std::move(factory) : ProviderFactory([](const llm::ProviderConfig& c) { return llm::make_provider(c); })),
      store_(config_.data_dir) {
  config_.generation.check();
}

llm::ProviderConfig Service::resolve_provider(const std::string& name, const std::string& model_name,
                                              const std::optional<std::string>& api_key) const {
  const auto wanted = name.empty() ? config_.default_provider : name;
  if (wanted.empty()) throw HttpError(400, "no provider given and no default provider configured");
  llm::ProviderConfig c;
  auto it = std::find_if(config_.providers.begin(), config_.providers.end(),
                         [&](const llm::ProviderConfig& p) { return p.name == wanted; });
  if (it != config_.providers.end()) {
    c = *it;
  } else {
    llm::ProviderKind kind;
    try {
      kind = llm::provider_kind_from_name(wanted);
    } catch (const std::exception&) {
      throw HttpError(400, "unknown provider '" + wanted + "'");
    }
    if (kind == llm::ProviderKind::mock) throw HttpError(400, "mock providers must be configured server-side");
    if (kind != llm::ProviderKind::echo && model_name.empty())
      throw HttpError(422, "model_name is required for provider '" + wanted + "'");
    c.name = wanted;
    c.kind = kind;
    c.api_key_env = default_key_env(kind);
  }
  if (!model_name.empty()) c.model = model_name;
  if (api_key && !api_key->empty()) c.api_key = *api_key;
  return c;
}

std::shared_ptr<std::mutex> Service::session_lock(const std::string& id) {
  std::lock_guard lock(locks_mu_);
  auto& m = locks_[id];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

SessionRecord Service::load_or_404(const std::string& id) const {
  if (!valid_id(id)) throw HttpError(404, "unknown session '" + id + "'");
  auto r = store_.load(id);
  if (!r) throw HttpError(404, "unknown session '" + id + "'");
  return std::move(*r);
}

std::string Service::new_id() {
  static const char* hex = "0123456789abcdef";
  std::lock_guard lock(locks_mu_);
  static std::mt19937_64 rng(std::random_device{}());
  for (;;) {
    std::string id;
    auto bits = rng();
    for (int i = 0; i < 16; ++i, bits >>= 4) id += hex[bits & 0xf];
    if (!locks_.count(id) && !fs::exists(fs::path(store_.dir()) / (id + ".json"))) {
      locks_[id] = std::make_shared<std::mutex>();
      return id;
    }
  }
}

nlohmann::json Service::create_session(const nlohmann::json& body, const std::optional<std::string>& api_key) {
  const auto description = detail::trim(body_string(body, "description"));
  if (description.empty()) throw HttpError(422, "description must not be empty");
  const auto provider_name = body_string(body, "provider");
  const auto model_name = body_string(body, "model_name");
  auto pc = resolve_provider(provider_name, model_name, api_key);
  auto provider = factory_(pc);

  auto session = llm::generate(description, *provider, config_.generation);
  if (!session.succeeded()) fail(session);

  SessionRecord r;
  r.id = new_id();
  auto lock = session_lock(r.id);
  std::lock_guard guard(*lock);
  r.provider = provider_name.empty() ? config_.default_provider : provider_name;
  r.model_name = model_name;
  r.created = r.updated = now_iso();
  r.versions.push_back(make_version(1, "generate", "", session, 0));
  r.session = std::move(session);
  store_.save(r);
  return version_response(r);
}

nlohmann::json Service::feedback(const std::string& id, const nlohmann::json& body,
                                 const std::optional<std::string>& api_key) {
  if (!valid_id(id)) throw HttpError(404, "unknown session '" + id + "'");
  auto lock = session_lock(id);
  std::lock_guard guard(*lock);
  auto r = load_or_404(id);
  const auto text = detail::trim(body_string(body, "text"));
  if (text.empty()) throw HttpError(422, "feedback text must not be empty");
  auto provider = factory_(resolve_provider(r.provider, r.model_name, api_key));

  const auto before = r.session.iterations.size();
  auto next = llm::refine(r.session, text, *provider, config_.generation);
  if (!next.succeeded()) fail(next);

  r.versions.push_back(make_version(r.versions.back().version + 1, "feedback", text, next, before));
  r.session = std::move(next);
  r.updated = now_iso();
  store_.save(r);
  return version_response(r);
}

nlohmann::json Service::optimize(const std::string& id, const std::optional<std::string>& api_key) {
  if (!valid_id(id)) throw HttpError(404, "unknown session '" + id + "'");
  auto lock = session_lock(id);
  std::lock_guard guard(*lock);
  auto r = load_or_404(id);
  auto provider = factory_(resolve_provider(r.provider, r.model_name, api_key));

  const auto before = r.session.iterations.size();
  auto opt = llm::optimize_output(r.session, *provider, config_.output_retry_limit);
  if (!opt.optimized)
    throw HttpError(409, opt.error, {{"sends", opt.sends}, {"version", r.versions.back().version}});
  if (!opt.unchanged) {
    r.versions.push_back(make_version(r.versions.back().version + 1, "optimize", "", opt.session,
                                      std::min(before, opt.session.iterations.size())));
    r.session = std::move(opt.session);
    r.updated = now_iso();
    store_.save(r);
  }
  auto out = version_response(r);
  out["unchanged"] = opt.unchanged;
  out["sends"] = opt.sends;
  return out;
}

nlohmann::json Service::history(const std::string& id) const {
  const auto r = load_or_404(id);
  auto versions = nlohmann::json::array();
  for (const auto& v : r.versions) versions.push_back(version_json(v));
  return {{"session_id", r.id},
          {"provider", r.provider},
          {"model_name", r.model_name},
          {"description", r.session.description},
          {"created", r.created},
          {"updated", r.updated},
          {"status", llm::status_name(r.session.status)},
          {"latest_version", r.versions.back().version},
          {"versions", versions}};
}

nlohmann::json Service::list_sessions() const {
  auto out = nlohmann::json::array();
  for (const auto& id : store_.list()) out.push_back(id);
  return {{"sessions", out}};
}

nlohmann::json Service::providers() const {
  auto out = nlohmann::json::array();
  for (const auto& p : config_.providers)
    out.push_back({{"name", p.name}, {"kind", llm::provider_kind_name(p.kind)}, {"model", p.model}});
  return {{"providers", out}, {"default", config_.default_provider}};
}

Document Service::export_model(const std::string& id, const std::string& format, int version) const {
  const auto r = load_or_404(id);
  const ModelVersion* v = nullptr;
  if (version == 0) {
    v = &r.versions.back();
  } else {
    for (const auto& x : r.versions)
      if (x.version == version) v = &x;
  }
  if (!v) throw HttpError(404, "session '" + id + "' has no version " + std::to_string(version));
  const auto stem = id + "-v" + std::to_string(v->version);
  if (format == "bpmn") return {bpmn::write_bpmn_xml(bpmn::to_bpmn(v->model)), "application/xml", stem + ".bpmn"};
  if (format == "pnml") return {petri::write_pnml(petri::to_petri_net(v->model)), "application/xml", stem + ".pnml"};
  if (format == "script") return {dsl::render(v->model).source, "text/x-python", stem + ".py"};
  if (format == "dot") return {petri::write_dot(petri::to_petri_net(v->model)), "text/vnd.graphviz", stem + ".dot"};
  if (format == "bpmn-dot") return {bpmn::write_dot(bpmn::to_bpmn(v->model)), "text/vnd.graphviz", stem + ".bpmn.dot"};
  if (format == "json") return {model_to_json(v->model).dump(2) + "\n", "application/json", stem + ".json"};
  throw HttpError(400, "unknown export format '" + format + "'");
}

}  // namespace powlgen::studio

#include "powlgen/llm/generation.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "powlgen/dsl.hpp"
#include "powlgen/model_json.hpp"
#include "util.hpp"

namespace powlgen::llm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

bool any_of_severity(const std::vector<Diagnostic>& ds, Severity s) {
  return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.severity() == s; });
}

std::string summarize(const std::vector<Diagnostic>& ds) {
  std::string out;
  for (const auto& d : ds) {
    if (d.severity() == Severity::warning) continue;
    if (!out.empty()) out += "; ";
    out += to_string(d);
  }
  return out;
}

void run_round(GenerationSession& s, ChatProvider& provider, const GenerationConfig& cfg) {
  s.final_model = nullptr;
  s.auto_fixed = false;
  s.failure_reason.clear();
  s.status = SessionStatus::failed;
  for (int attempt = 1; attempt <= cfg.total_iteration_limit; ++attempt) {
    IterationRecord rec;
    rec.round = s.round;
    rec.attempt = attempt;

    const auto t0 = Clock::now();
    std::string reply;
    try {
      reply = provider.complete(s.conversation);
    } catch (const TransportError& e) {
      rec.provider_seconds = seconds_since(t0);
      rec.diagnostics.push_back({DiagCode::transport_error, e.what(), "provider " + provider.name()});
      s.iterations.push_back(std::move(rec));
      s.failure_reason = std::string("transport error: ") + e.what();
      return;
    }
    rec.provider_seconds = seconds_since(t0);

    const auto t1 = Clock::now();
    s.conversation.push_back({Role::assistant, reply.empty() ? std::string("(empty response)") : reply});
    Model model;
    auto extracted = dsl::extract_code(reply);
    rec.script = extracted.script.source;
    if (extracted.error) {
      rec.diagnostics.push_back(*extracted.error);
    } else {
      auto compiled = dsl::compile(extracted.script);
      rec.diagnostics = compiled.report.diagnostics();
      model = compiled.model;
    }
    const bool critical = !model || any_of_severity(rec.diagnostics, Severity::critical);
    const bool adjustable = any_of_severity(rec.diagnostics, Severity::adjustable);

    if (!critical && !adjustable) {
      s.final_model = model;
      s.status = SessionStatus::succeeded;
    } else if (!critical && (attempt > cfg.adjustable_iteration_threshold || attempt == cfg.total_iteration_limit)) {
      s.final_model = auto_fix_reuse(model).model;
      s.auto_fixed = true;
      s.status = SessionStatus::succeeded_with_autofix;
    } else if (attempt < cfg.total_iteration_limit) {
      s.conversation.push_back(error_prompt(rec.diagnostics));
    } else {
      s.failure_reason = "no valid model after " + std::to_string(attempt) + " iterations: " + summarize(rec.diagnostics);
    }
    rec.local_seconds = seconds_since(t1);
    s.iterations.push_back(std::move(rec));
    if (s.succeeded()) return;
  }
}

}  // namespace

void GenerationConfig::check() const {
  if (adjustable_iteration_threshold < 1) throw std::invalid_argument("adjustable_iteration_threshold must be >= 1");
  if (total_iteration_limit < adjustable_iteration_threshold)
    throw std::invalid_argument("total_iteration_limit must be >= adjustable_iteration_threshold");
}

std::string_view status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::succeeded:
      return "succeeded";
    case SessionStatus::succeeded_with_autofix:
      return "succeeded_with_autofix";
    case SessionStatus::failed:
      return "failed";
  }
  return "failed";
}

SessionStatus status_from_name(std::string_view name) {
  for (auto s : {SessionStatus::succeeded, SessionStatus::succeeded_with_autofix, SessionStatus::failed})
    if (status_name(s) == name) return s;
  throw std::invalid_argument("unknown session status: " + std::string(name));
}

int GenerationSession::iteration_count() const {
  return static_cast<int>(
      std::count_if(iterations.begin(), iterations.end(), [&](const IterationRecord& r) { return r.round == round; }));
}

double GenerationSession::total_seconds() const {
  double t = 0;
  for (const auto& r : iterations)
    if (r.round == round) t += r.provider_seconds + r.local_seconds;
  return t;
}

std::vector<double> GenerationSession::iteration_seconds() const {
  std::vector<double> out;
  for (const auto& r : iterations)
    if (r.round == round) out.push_back(r.provider_seconds + r.local_seconds);
  return out;
}

std::vector<Diagnostic> GenerationSession::last_diagnostics() const {
  return iterations.empty() ? std::vector<Diagnostic>{} : iterations.back().diagnostics;
}

GenerationSession generate(const std::string& description, ChatProvider& provider, const GenerationConfig& cfg) {
  cfg.check();
  GenerationSession s;
  s.description = description;
  s.conversation = build_initial_prompt(description, cfg.prompt);
  run_round(s, provider, cfg);
  return s;
}

GenerationSession refine(GenerationSession session, const std::string& feedback, ChatProvider& provider,
                         const GenerationConfig& cfg) {
  cfg.check();
  if (powlgen::detail::trim(feedback).empty()) throw std::invalid_argument("feedback is empty");
  if (!session.succeeded()) throw std::invalid_argument("only a successful session can be refined");
  session.conversation.push_back(feedback_prompt(feedback));
  ++session.round;
  run_round(session, provider, cfg);
  return session;
}

nlohmann::json iteration_to_json(const IterationRecord& r) {
  auto diags = nlohmann::json::array();
  for (const auto& d : r.diagnostics) diags.push_back(diagnostic_to_json(d));
  return {{"round", r.round},
          {"attempt", r.attempt},
          {"script", r.script},
          {"diagnostics", diags},
          {"provider_seconds", r.provider_seconds},
          {"local_seconds", r.local_seconds}};
}

IterationRecord iteration_from_json(const nlohmann::json& j) {
  IterationRecord rec;
  rec.round = j.at("round");
  rec.attempt = j.at("attempt");
  rec.script = j.at("script");
  for (const auto& d : j.at("diagnostics")) rec.diagnostics.push_back(diagnostic_from_json(d));
  rec.provider_seconds = j.at("provider_seconds");
  rec.local_seconds = j.at("local_seconds");
  return rec;
}

nlohmann::json session_to_json(const GenerationSession& s) {
  auto conv = nlohmann::json::array();
  for (const auto& m : s.conversation) conv.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  auto iters = nlohmann::json::array();
  for (const auto& r : s.iterations) iters.push_back(iteration_to_json(r));
  return {{"description", s.description},
          {"conversation", conv},
          {"iterations", iters},
          {"final_model", s.final_model ? model_to_json(s.final_model) : nlohmann::json()},
          {"status", status_name(s.status)},
          {"auto_fixed", s.auto_fixed},
          {"round", s.round},
          {"failure_reason", s.failure_reason}};
}

GenerationSession session_from_json(const nlohmann::json& j) {
  GenerationSession s;
  s.description = j.at("description").get<std::string>();
  for (const auto& m : j.at("conversation"))
    s.conversation.push_back(make_message(role_from_name(m.at("role").get<std::string>()), m.at("content")));
  for (const auto& r : j.at("iterations")) s.iterations.push_back(iteration_from_json(r));
  if (!j.at("final_model").is_null()) s.final_model = model_from_json(j.at("final_model"));
  s.status = status_from_name(j.at("status").get<std::string>());
  s.auto_fixed = j.at("auto_fixed");
  s.round = j.at("round");
  s.failure_reason = j.value("failure_reason", std::string());
  return s;
}

}  // namespace powlgen::llm

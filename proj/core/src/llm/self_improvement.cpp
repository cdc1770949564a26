#include "powlgen/llm/self_improvement.hpp"

#include <regex>

#include "powlgen/dsl.hpp"
#include "util.hpp"

namespace powlgen::llm {

namespace {

std::string format_lines(std::size_t k) {
  std::string out;
  for (std::size_t i = 1; i <= k; ++i) out += "R" + std::to_string(i) + ": <score>\n";
  out.pop_back();
  return out;
}

std::string format_block(std::size_t k) {
  auto text = prompt_asset("self_eval_format.txt");
  const std::string key = "{format}";
  text.replace(text.find(key), key.size(), format_lines(k));
  return text;
}

}  // namespace

std::string_view criteria_name(Criteria c) { return c == Criteria::general ? "general" : "conformance"; }

Conversation self_eval_prompt(const std::string& description, const std::vector<Candidate>& candidates,
                              Criteria criteria) {
  std::string user = prompt_asset("self_eval_task.txt");
  user += "\nProcess description:\n" + powlgen::detail::trim(description) + "\n";
  for (std::size_t i = 0; i < candidates.size(); ++i)
    user += "\nR" + std::to_string(i + 1) + ":\n```python\n" + candidates[i].script + "```\n";
  user += "\n" + prompt_asset(criteria == Criteria::general ? "criteria_general.txt" : "criteria_conformance.txt");
  user += "\n" + format_block(candidates.size());
  return {make_message(Role::system, prompt_asset("role.txt")), make_message(Role::user, std::move(user))};
}

std::optional<std::vector<double>> parse_scores(const std::string& response, std::size_t k) {
  static const std::regex line_re(R"(^[\s*#>\-]*R(\d+)[\s*]*[:=][\s*]*([0-9]*\.?[0-9]+))");
  std::vector<std::optional<double>> found(k);
  for (const auto& line : powlgen::detail::split_lines(response)) {
    std::smatch m;
    if (!std::regex_search(line, m, line_re)) continue;
    const auto idx = std::stoul(m[1].str());
    if (idx < 1 || idx > k || found[idx - 1]) continue;
    const double v = std::stod(m[2].str());
    if (v < 0.0 || v > 1.0) continue;
    found[idx - 1] = v;
  }
  std::vector<double> out;
  for (const auto& f : found) {
    if (!f) return std::nullopt;
    out.push_back(*f);
  }
  return out;
}

std::size_t select_best(const std::vector<double>& scores) {
  if (scores.empty()) throw std::invalid_argument("no scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

SelfEvaluation self_evaluate_select(const std::string& description, const std::vector<Candidate>& candidates,
                                    Criteria criteria, ChatProvider& provider) {
  if (candidates.size() < 2) throw std::invalid_argument("self-evaluation needs at least 2 candidates");
  auto conv = self_eval_prompt(description, candidates, criteria);
  SelfEvaluation result;
  for (int ask = 0; ask <= kEvaluationReasks; ++ask) {
    const auto reply = provider.complete(conv);
    ++result.calls;
    if (auto scores = parse_scores(reply, candidates.size())) {
      result.scores = std::move(*scores);
      result.selected = select_best(result.scores);
      return result;
    }
    conv.push_back({Role::assistant, reply.empty() ? std::string("(empty response)") : reply});
    conv.push_back(make_message(Role::user, "Your answer could not be read. " + format_block(candidates.size())));
  }
  throw EvaluationError("no score line per candidate after " + std::to_string(kEvaluationReasks) + " re-asks");
}

std::string optimize_input(const std::string& description, ChatProvider& provider) {
  return powlgen::detail::trim(provider.complete(input_optimization_prompt(description)));
}

OutputOptimization optimize_output(const GenerationSession& session, ChatProvider& provider, int retry_limit) {
  if (!session.succeeded() || !session.final_model)
    throw std::invalid_argument("only a successful session can be optimized");
  if (retry_limit < 1) throw std::invalid_argument("retry_limit must be >= 1");
  OutputOptimization out;
  out.session = session;
  auto request = session.conversation;
  request.push_back(output_optimization_prompt());
  for (int send = 1; send <= retry_limit; ++send) {
    out.requests.push_back(request);
    ++out.sends;
    std::string reply;
    try {
      reply = provider.complete(request);
    } catch (const TransportError& e) {
      out.error = e.what();
      continue;
    }
    auto extracted = dsl::extract_code(reply);
    if (extracted.error) {
      out.error = to_string(*extracted.error);
      continue;
    }
    auto compiled = dsl::compile(extracted.script);
    if (!compiled.model || !compiled.report.is_valid()) {
      out.error = compiled.report.diagnostics().empty() ? "no model" : to_string(compiled.report.diagnostics().front());
      continue;
    }
    auto model = compiled.model;
    if (compiled.report.has(Severity::adjustable)) model = auto_fix_reuse(model).model;
    out.session.conversation = request;
    out.session.conversation.push_back({Role::assistant, reply});
    out.unchanged = structural_equal(session.final_model, model);
    out.session.final_model = model;
    out.optimized = true;
    out.error.clear();
    return out;
  }
  out.error = std::string(OutputOptimization::failure_code) + " after " + std::to_string(retry_limit) +
              " sends: " + out.error;
  return out;
}

}  // namespace powlgen::llm

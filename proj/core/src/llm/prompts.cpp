#include "powlgen/llm/prompts.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "util.hpp"

namespace powlgen::llm {

namespace detail {
const std::map<std::string, std::string>& embedded_assets();
}

namespace {

std::string fill(std::string text, std::string_view key, const std::string& value) {
  auto at = text.find(key);
  if (at != std::string::npos) text.replace(at, key.size(), value);
  return text;
}

}  // namespace

const std::string& prompt_asset(const std::string& name) {
  const auto& assets = detail::embedded_assets();
  auto it = assets.find(name);
  if (it == assets.end()) throw std::out_of_range("unknown prompt asset: " + name);
  return it->second;
}

std::vector<std::string> prompt_asset_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : detail::embedded_assets()) out.push_back(name);
  return out;
}

std::vector<std::string> shuffled_labels(std::vector<std::string> labels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

Conversation build_initial_prompt(const std::string& description, const PromptConfig& cfg) {
  if (powlgen::detail::trim(description).empty()) throw std::invalid_argument("process description is empty");
  std::string user = prompt_asset("powl_knowledge.txt");
  for (const auto& shot : cfg.few_shot_assets) user += "\n" + prompt_asset(shot);
  user += "\n" + prompt_asset("negative.txt");
  user += "\nProcess description:\n" + powlgen::detail::trim(description) + "\n";
  if (cfg.label_constraint) {
    user += "\n" + prompt_asset("label_constraint.txt");
    for (const auto& l : shuffled_labels(*cfg.label_constraint, cfg.seed)) user += "- " + l + "\n";
  }
  return {make_message(Role::system, prompt_asset("role.txt")), make_message(Role::user, std::move(user))};
}

ChatMessage error_prompt(const std::vector<Diagnostic>& diagnostics) {
  std::string list;
  for (const auto& d : diagnostics)
    if (d.severity() != Severity::warning) list += "- " + to_string(d) + "\n";
  if (!list.empty()) list.pop_back();
  return make_message(Role::user, fill(prompt_asset("error_feedback.txt"), "{errors}", list));
}

ChatMessage feedback_prompt(const std::string& feedback) {
  return make_message(Role::user, fill(prompt_asset("refine.txt"), "{feedback}", powlgen::detail::trim(feedback)));
}

ChatMessage output_optimization_prompt() { return make_message(Role::user, prompt_asset("output_optimization.txt")); }

Conversation input_optimization_prompt(const std::string& description) {
  if (powlgen::detail::trim(description).empty()) throw std::invalid_argument("process description is empty");
  return {make_message(Role::system, prompt_asset("input_optimization.txt")), make_message(Role::user, description)};
}

}  // namespace powlgen::llm

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "powlgen/diagnostics.hpp"
#include "powlgen/llm/chat.hpp"

namespace powlgen::llm {

/// Contents of a shipped prompt asset ("role.txt", ...).
/// Throws std::out_of_range for unknown names.
const std::string& prompt_asset(const std::string& name);
std::vector<std::string> prompt_asset_names();

struct PromptConfig {
  std::optional<std::vector<std::string>> label_constraint;
  std::vector<std::string> few_shot_assets{"few_shot_bicycle.txt"};
  std::uint64_t seed = 0;
};

/// system: role; user: knowledge, few-shot examples, negative notes,
/// description, and the shuffled label list when a constraint is set.
/// Throws std::invalid_argument on an empty description.
Conversation build_initial_prompt(const std::string& description, const PromptConfig& cfg);

/// Deterministic for a given seed.
std::vector<std::string> shuffled_labels(std::vector<std::string> labels, std::uint64_t seed);

ChatMessage error_prompt(const std::vector<Diagnostic>& diagnostics);
ChatMessage feedback_prompt(const std::string& feedback);
ChatMessage output_optimization_prompt();
Conversation input_optimization_prompt(const std::string& description);

}  // namespace powlgen::llm

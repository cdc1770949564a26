#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "powlgen/diagnostics.hpp"
#include "powlgen/llm/chat.hpp"
#include "powlgen/llm/prompts.hpp"
#include "powlgen/model.hpp"

namespace powlgen::llm {

struct GenerationConfig {
  int adjustable_iteration_threshold = 10;
  int total_iteration_limit = 15;
  PromptConfig prompt;

  /// Throws std::invalid_argument.
  void check() const;
};

enum class SessionStatus { succeeded, succeeded_with_autofix, failed };

std::string_view status_name(SessionStatus s);
SessionStatus status_from_name(std::string_view name);

struct IterationRecord {
  int round = 0;    // 0 = initial generation, n = n-th refinement
  int attempt = 0;  // 1-based within the round
  std::string script;
  std::vector<Diagnostic> diagnostics;
  double provider_seconds = 0;
  double local_seconds = 0;
};

struct GenerationSession {
  std::string description;
  Conversation conversation;
  std::vector<IterationRecord> iterations;
  Model final_model;
  SessionStatus status = SessionStatus::failed;
  bool auto_fixed = false;
  int round = 0;
  std::string failure_reason;

  bool succeeded() const { return status != SessionStatus::failed; }
  /// Attempts used in the current round.
  int iteration_count() const;
  double total_seconds() const;
  std::vector<double> iteration_seconds() const;
  /// Diagnostics of the last attempt.
  std::vector<Diagnostic> last_diagnostics() const;
};

/// Error-handling loop: critical diagnostics are fed back until the total
/// limit; adjustable-only attempts are fed back up to the threshold and then
/// auto-fixed. Transport failures end the session as failed.
GenerationSession generate(const std::string& description, ChatProvider& provider, const GenerationConfig& cfg = {});

/// Appends a feedback prompt and reruns the loop with a fresh budget.
/// Throws std::invalid_argument for empty feedback or an unsuccessful session.
GenerationSession refine(GenerationSession session, const std::string& feedback, ChatProvider& provider,
                         const GenerationConfig& cfg = {});

nlohmann::json iteration_to_json(const IterationRecord& r);
IterationRecord iteration_from_json(const nlohmann::json& j);
nlohmann::json session_to_json(const GenerationSession& s);
GenerationSession session_from_json(const nlohmann::json& j);

}  // namespace powlgen::llm

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "powlgen/llm/chat.hpp"
#include "powlgen/llm/generation.hpp"
#include "powlgen/model.hpp"

namespace powlgen::llm {

enum class Criteria { general, conformance };

std::string_view criteria_name(Criteria c);

struct Candidate {
  Model model;
  std::string script;  // rendered construction script
};

struct SelfEvaluation {
  std::vector<double> scores;
  std::size_t selected = 0;  // 0-based
  int calls = 0;
};

/// Raised when no complete score list is found after the re-asks.
class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what) : std::runtime_error("UNPARSEABLE_EVALUATION: " + what) {}
  static constexpr std::string_view code = "UNPARSEABLE_EVALUATION";
};

Conversation self_eval_prompt(const std::string& description, const std::vector<Candidate>& candidates,
                              Criteria criteria);

/// Scans lines of the form "R<i>: <score>" with score in [0,1]; returns
/// std::nullopt unless every candidate 1..k received a score.
std::optional<std::vector<double>> parse_scores(const std::string& response, std::size_t k);

/// argmax, lowest index on ties. Throws std::invalid_argument on an empty list.
std::size_t select_best(const std::vector<double>& scores);

constexpr int kEvaluationReasks = 3;

/// Throws std::invalid_argument with fewer than 2 candidates, EvaluationError, TransportError.
SelfEvaluation self_evaluate_select(const std::string& description, const std::vector<Candidate>& candidates,
                                    Criteria criteria, ChatProvider& provider);

/// Sends the input-optimization prompt and returns the trimmed reply.
std::string optimize_input(const std::string& description, ChatProvider& provider);

struct OutputOptimization {
  GenerationSession session;
  bool optimized = false;  // false: OPTIMIZATION_FAILED, original model kept
  bool unchanged = false;  // reply was structurally equal to the previous model
  int sends = 0;
  std::vector<Conversation> requests;
  std::string error;

  static constexpr std::string_view failure_code = "OPTIMIZATION_FAILED";
};

/// Re-sends the identical prompt while the reply has critical diagnostics.
/// Adjustable diagnostics are auto-fixed. Throws std::invalid_argument for
/// an unsuccessful session.
OutputOptimization optimize_output(const GenerationSession& session, ChatProvider& provider, int retry_limit = 5);

}  // namespace powlgen::llm

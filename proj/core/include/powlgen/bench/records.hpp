#pragma once

#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "powlgen/llm/generation.hpp"

namespace powlgen::bench {

enum class Strategy { baseline, self_eval_general, self_eval_conformance, input_opt, output_opt };

std::string_view strategy_name(Strategy s);
Strategy strategy_from_name(std::string_view name);
std::vector<Strategy> all_strategies();
/// Comma-separated names; "all" selects every strategy.
std::vector<Strategy> parse_strategies(const std::string& list);

struct RunRecord {
  std::string fixture;
  std::string provider;
  Strategy strategy = Strategy::baseline;
  std::string band = "long";  // description length band

  int iterations = 0;
  llm::SessionStatus status = llm::SessionStatus::failed;
  bool auto_fixed = false;
  double total_seconds = 0;
  std::vector<double> iteration_seconds;
  std::optional<double> fitness;
  std::optional<double> precision;
  std::optional<double> quality;  // present iff status != failed
  std::string error;

  // self-evaluation: reference quality per candidate (nullopt when it failed) and LLM scores
  std::vector<std::optional<double>> candidate_quality;
  std::vector<double> llm_scores;
  std::optional<int> selected;

  // input/output optimization: quality of the unoptimized run
  std::optional<double> quality_before;
  bool unchanged = false;
  int sends = 0;

  std::tuple<std::string, std::string, std::string, std::string> key() const {
    return {fixture, provider, std::string(strategy_name(strategy)), band};
  }
};

nlohmann::json record_to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);

/// Reads a JSON-lines file; a truncated last line (interrupted write) is skipped.
std::vector<RunRecord> load_records(const std::string& path);

/// Serialized append-only JSON-lines writer, flushed per record.
class RecordSink {
 public:
  explicit RecordSink(const std::string& path);
  void append(const RunRecord& r);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace powlgen::bench

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "powlgen/bench/records.hpp"
#include "powlgen/llm/self_improvement.hpp"

namespace powlgen::bench {

constexpr double kBestBuffer = 0.02;

struct ErrorHandlingRow {
  std::string provider;
  int cases = 0;
  double avg_iterations = 0;
  int without_errors = 0;
  int auto_adjusted = 0;
  int failures = 0;
};

struct QualityRow {
  std::string provider;
  int cases = 0;
  double avg_quality = 0;  // failed runs count as 0
};

struct TimeRow {
  std::string provider;
  int cases = 0;
  double avg_total_seconds = 0;
  double avg_seconds_per_iteration = 0;
};

struct SelfEvalRow {
  std::string provider;
  llm::Criteria criteria = llm::Criteria::general;
  int cases = 0;
  double min_candidate_avg = 0;  // average quality of candidate position R_i, min over i
  double max_candidate_avg = 0;
  int subset_match = 0;
  int exact_match = 0;
  double avg_selected_quality = 0;
};

struct InputOptRow {
  std::string provider;
  std::string band;
  int cases = 0;
  double avg_before = 0;
  double avg_after = 0;
  int increased = 0;
};

struct OutputOptRow {
  std::string provider;
  int cases = 0;
  double avg_before = 0;
  double avg_after = 0;
  double max_improvement = 0;
  double max_decline = 0;
};

/// Indices whose quality is within the buffer of the best one.
std::set<std::size_t> best_set(const std::vector<double>& quality, double buffer = kBestBuffer);
/// Indices holding the maximal LLM score.
std::set<std::size_t> selected_set(const std::vector<double>& scores);

std::vector<ErrorHandlingRow> error_handling(const std::vector<RunRecord>& records);
std::vector<QualityRow> quality(const std::vector<RunRecord>& records);
std::vector<TimeRow> timing(const std::vector<RunRecord>& records);
std::vector<SelfEvalRow> self_evaluation(const std::vector<RunRecord>& records);
std::vector<InputOptRow> input_optimization(const std::vector<RunRecord>& records);
std::vector<OutputOptRow> output_optimization(const std::vector<RunRecord>& records);

struct Table {
  std::string name;   // file stem, e.g. "table1_error_handling"
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

/// Tables 1-6. ground_truth adds the "Ground Truth" row to the quality table.
/// Throws std::invalid_argument on an empty record list.
std::vector<Table> emit_reports(const std::vector<RunRecord>& records,
                                const std::optional<std::map<std::string, double>>& ground_truth = std::nullopt);

/// Writes <name>.csv and <name>.txt per table plus report.txt with all tables.
void write_reports(const std::vector<Table>& tables, const std::string& dir);

}  // namespace powlgen::bench

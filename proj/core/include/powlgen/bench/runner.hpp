#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "powlgen/bench/fixtures.hpp"
#include "powlgen/bench/records.hpp"
#include "powlgen/conformance.hpp"
#include "powlgen/llm/chat.hpp"
#include "powlgen/llm/generation.hpp"

namespace powlgen::bench {

struct MatrixConfig {
  llm::GenerationConfig generation;
  int candidates = 4;
  int output_retry_limit = 5;
  std::uint64_t seed = 0;
  bool label_constraint = true;
  std::vector<std::string> input_bands{"long", "medium", "short"};
  conformance::EvaluateOptions evaluate;
  std::string records_path;  // JSON-lines file; existing records are kept and skipped
  std::function<void(const RunRecord&)> on_record;
};

/// Creates the provider for one run. Mock scripts have "{{ground_truth}}"
/// replaced by the fixture's ground-truth script.
std::unique_ptr<llm::ChatProvider> provider_for(const llm::ProviderConfig& config, const Fixture& fixture);

/// Runs every (fixture, provider, strategy[, band]) combination not yet in
/// records_path. Providers run concurrently, each limited to its
/// max_concurrency. Per-run failures are recorded, never thrown.
/// Returns all records sorted by key.
std::vector<RunRecord> run_matrix(const std::vector<Fixture>& fixtures, const std::vector<llm::ProviderConfig>& providers,
                                  const std::vector<Strategy>& strategies, const MatrixConfig& cfg);

/// Self-conformance quality per fixture id.
std::map<std::string, double> ground_truth_quality(const std::vector<Fixture>& fixtures,
                                                   const conformance::EvaluateOptions& options = {});

}  // namespace powlgen::bench

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "powlgen/event_log.hpp"
#include "powlgen/model.hpp"
#include "powlgen/petri_net.hpp"

namespace powlgen::conformance {

struct ReplayCounters {
  long produced = 0;
  long consumed = 0;
  long missing = 0;
  long remaining = 0;

  ReplayCounters& operator+=(const ReplayCounters& o) {
    produced += o.produced;
    consumed += o.consumed;
    missing += o.missing;
    remaining += o.remaining;
    return *this;
  }
};

struct TraceReplay {
  std::string case_id;
  bool fit = false;
  ReplayCounters counters;
};

struct FitnessResult {
  double fitness = 1.0;
  ReplayCounters totals;
  std::vector<TraceReplay> traces;
};

/// Token-based replay. p counts initial tokens and tokens produced by firings;
/// c counts tokens consumed by firings and the final marking; m counts tokens
/// that had to be inserted; r counts tokens left after the final marking is
/// consumed. fitness = 1/2 (1 - m/c) + 1/2 (1 - r/p).
/// Traces that the net can replay exactly (via any tau moves) are fit; otherwise
/// events are replayed greedily, enabling through shortest tau sequences.
/// Events whose label has no transition count as one missing and one consumed token.
FitnessResult replay_fitness(const petri::PetriNet& net, const EventLog& log);

/// Escaping-edges precision over the log's prefix automaton, tracking the set
/// of markings consistent with each prefix. 1.0 when no state enables anything.
double escaping_precision(const petri::PetriNet& net, const EventLog& log);

/// Harmonic mean; 0 when both are 0.
double quality_score(double fitness, double precision);

struct ConformanceReport {
  double fitness = 0.0;
  double precision = 0.0;
  double quality = 0.0;
  ReplayCounters counters;
  std::vector<TraceReplay> per_trace;
  std::optional<std::string> error;  // set when the candidate could not be translated
};

struct EvaluateOptions {
  bool reduce_silent = false;  // apply petri::reduce_silent before replay
};

/// Never throws: an untranslatable candidate yields zeros and an error message.
ConformanceReport evaluate_model(const Model& candidate, const EventLog& truth_log, const EvaluateOptions& options = {});

nlohmann::json report_to_json(const ConformanceReport& report);

}  // namespace powlgen::conformance

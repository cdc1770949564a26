#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>

#include "powlgen/event_log.hpp"
#include "powlgen/model.hpp"

namespace powlgen {

struct SimulationConfig {
  int loop_cap = 2;                  // max executions of a loop's do-part, per loop node
  std::size_t max_variants = 10000;  // safety cap on any intermediate or final set
};

struct VariantSet {
  std::set<Trace> traces;
  bool truncated = false;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bounded language of the model. Partial orders interleave one trace per
/// node such that all events of x precede all events of y for each edge.
/// Throws SimulationError for invalid configs or models with critical diagnostics.
VariantSet enumerate_variants(const Model& model, const SimulationConfig& cfg = {});

/// One case per variant, ids c1..cn in lexicographic trace order.
/// Throws SimulationError when the enumeration was truncated.
EventLog simulate_log(const Model& model, const SimulationConfig& cfg = {});

}  // namespace powlgen

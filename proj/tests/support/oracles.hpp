#pragma once

#include <set>
#include <string>
#include <vector>

#include "powlgen/event_log.hpp"
#include "powlgen/model.hpp"
#include "powlgen/petri_net.hpp"

namespace oracle {

using Trace = powlgen::Trace;

/// A fully resolved run skeleton: events plus precedence pairs.
struct EventDag {
  std::vector<std::string> labels;
  std::set<std::pair<std::size_t, std::size_t>> before;
};

/// Resolves every choice and unrolls every loop 1..loop_cap times.
std::vector<EventDag> resolve(const powlgen::Model& model, int loop_cap);

/// Variants via recursive linear-extension enumeration of each resolved DAG.
std::set<Trace> brute_force_variants(const powlgen::Model& model, int loop_cap);

/// Variants via filtering all permutations of each DAG's events (small models only).
std::set<Trace> permutation_filter_variants(const powlgen::Model& model, int loop_cap);

/// Depth-first reachability: can the net replay `trace` from the initial to the final marking?
bool net_accepts(const powlgen::petri::PetriNet& net, const Trace& trace);

/// The bicycle manufacturing model, built directly through the factories.
powlgen::Model bicycle_model();

}  // namespace oracle

#pragma once

#include <optional>
#include <vector>

#include "powlgen/model.hpp"

namespace powlgen::order {

/// Transitive closure over n nodes; nullopt if the relation has a cycle
/// (including self-loops).
std::optional<EdgeSet> transitive_closure(std::size_t n, const EdgeSet& edges);

/// Hasse diagram of an acyclic relation. Input need not be closed.
EdgeSet transitive_reduction(std::size_t n, const EdgeSet& edges);

/// Indices with no incoming / outgoing edge.
std::vector<std::size_t> minimal_nodes(std::size_t n, const EdgeSet& edges);
std::vector<std::size_t> maximal_nodes(std::size_t n, const EdgeSet& edges);

}  // namespace powlgen::order

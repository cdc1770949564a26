#pragma once

#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "powlgen/diagnostics.hpp"

namespace powlgen {

class PowlNode;

/// Models are immutable and shared. Pointer identity is what "the same
/// sub-model object" means for reuse detection.
using Model = std::shared_ptr<const PowlNode>;

enum class NodeKind { activity, silent, xor_choice, loop, partial_order };

using Edge = std::pair<std::size_t, std::size_t>;
using EdgeSet = std::set<Edge>;

class PowlNode {
 public:
  NodeKind kind() const { return kind_; }

  /// Activity label, already trimmed. Empty for other kinds.
  const std::string& label() const { return label_; }

  /// Xor branches, partial-order nodes, or {do, redo} for loops.
  const std::vector<Model>& children() const { return children_; }

  const Model& do_part() const { return children_.at(0); }
  const Model& redo_part() const { return children_.at(1); }

  /// Partial-order edges as (from, to) indices into children().
  const EdgeSet& edges() const { return edges_; }

  bool is_activity() const { return kind_ == NodeKind::activity; }
  bool is_silent() const { return kind_ == NodeKind::silent; }

 private:
  friend Model activity(std::string label);
  friend Model silent();
  friend Model xor_of(std::vector<Model> children);
  friend Model loop(Model do_part, Model redo_part);
  friend Model partial_order(std::vector<Model> nodes, EdgeSet edges);

  struct Token {};

 public:
  PowlNode(Token, NodeKind kind, std::string label, std::vector<Model> children, EdgeSet edges)
      : kind_(kind), label_(std::move(label)), children_(std::move(children)), edges_(std::move(edges)) {}

 private:
  NodeKind kind_;
  std::string label_;
  std::vector<Model> children_;
  EdgeSet edges_;
};

// Construction. Arity is enforced here (PowlError), edge indices with std::out_of_range;
// order properties (irreflexivity, acyclicity) are left to validate().

Model activity(std::string label);
Model silent();
Model xor_of(std::vector<Model> children);
Model loop(Model do_part, Model redo_part);
Model partial_order(std::vector<Model> nodes, EdgeSet edges = {});

/// Fresh objects at every position of the copy.
Model deep_copy(const Model& model);

std::string_view kind_name(NodeKind kind);

/// Reports IRREFLEXIVITY_VIOLATION, ORDER_CYCLE and SUBMODEL_REUSE. Never throws.
ValidationReport validate(const Model& model);

/// Transitive closure of one partial order node (children are kept as-is).
/// Throws PowlError(ORDER_CYCLE) when the closure would contain (i, i).
Model close_order(const Model& partial_order_node);

/// close_order applied to every partial order in the tree. Shared
/// sub-models stay shared in the result.
Model close_all_orders(const Model& model);

struct AutoFixResult {
  Model model;
  std::size_t fixed = 0;
};

/// Replaces the second and later occurrences of a reused node object with deep copies.
AutoFixResult auto_fix_reuse(const Model& model);

/// Isomorphism up to partial-order node listing and xor branch order.
/// Partial orders are compared by the transitive closure of their edges.
bool structural_equal(const Model& a, const Model& b);

struct ModelStats {
  std::size_t activities = 0;
  std::size_t silents = 0;
  std::size_t choices = 0;
  std::size_t loops = 0;
  std::size_t partial_orders = 0;
};

/// Counts per tree position (a reused object is counted once per occurrence).
ModelStats stats(const Model& model);

/// Distinct activity labels, sorted.
std::vector<std::string> activity_labels(const Model& model);

bool contains_loop(const Model& model);

}  // namespace powlgen

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "powlgen/model.hpp"

namespace powlgen::bpmn {

enum class ElementKind { start_event, end_event, task, exclusive_gateway, parallel_gateway };

struct Element {
  std::string id;
  ElementKind kind;
  std::string label;  // tasks only
};

struct Flow {
  std::string id;
  std::size_t source;
  std::size_t target;
};

class BpmnGraph {
 public:
  std::size_t add(ElementKind kind, std::string label = {});
  void connect(std::size_t from, std::size_t to);

  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<Flow>& flows() const { return flows_; }

  std::size_t in_degree(std::size_t e) const;
  std::size_t out_degree(std::size_t e) const;
  std::size_t count(ElementKind kind) const;

  /// Removes gateways with exactly one incoming and one outgoing flow.
  void elide_trivial_gateways();
  /// Drops removed elements and assigns final ids (element order is creation order).
  void finalize();

 private:
  std::vector<Element> elements_;
  std::vector<Flow> flows_;
  std::vector<bool> removed_;
};

struct BpmnOptions {
  bool elide_trivial_gateways = true;
};

/// Activity -> task, Silent -> plain flow, Xor -> exclusive split/join,
/// Loop -> exclusive join before do / exclusive split after do,
/// PartialOrder -> parallel split/join plus parallel gateways for fan-in/out.
/// Throws PowlError for models with critical diagnostics.
BpmnGraph to_bpmn(const Model& model, const BpmnOptions& options = {});

/// Single start/end event, connectivity, and gateway routing roles.
std::vector<std::string> graph_violations(const BpmnGraph& graph);

std::string write_bpmn_xml(const BpmnGraph& graph);
std::string write_dot(const BpmnGraph& graph);

/// {"nodes":[{"id","kind","label"}], "edges":[{"id","source","target"}]} for UI rendering.
nlohmann::json graph_to_json(const BpmnGraph& graph);

std::string_view kind_name(ElementKind kind);

}  // namespace powlgen::bpmn

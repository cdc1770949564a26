#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "powlgen/model.hpp"

namespace powlgen::petri {

/// Token count per place index.
using Marking = std::vector<int>;

struct Place {
  std::string id;
};

struct Transition {
  std::string id;
  std::optional<std::string> label;  // nullopt: silent (tau)
  std::vector<std::size_t> inputs;   // place indices
  std::vector<std::size_t> outputs;

  bool silent() const { return !label.has_value(); }
};

struct Arc {
  bool place_to_transition = true;
  std::size_t place = 0;
  std::size_t transition = 0;
};

class PetriNet {
 public:
  std::size_t add_place(std::string id);
  std::size_t add_transition(std::string id, std::optional<std::string> label);
  void add_input(std::size_t place, std::size_t transition);   // place -> transition
  void add_output(std::size_t transition, std::size_t place);  // transition -> place

  const std::vector<Place>& places() const { return places_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  Marking& initial_marking() { return initial_; }
  Marking& final_marking() { return final_; }
  const Marking& initial_marking() const { return initial_; }
  const Marking& final_marking() const { return final_; }

  Marking empty_marking() const { return Marking(places_.size(), 0); }
  std::optional<std::size_t> find_place(const std::string& id) const;

  bool enabled(const Marking& m, std::size_t t) const;
  /// Fires t (which must be enabled).
  Marking fire(const Marking& m, std::size_t t) const;

 private:
  std::vector<Place> places_;
  std::vector<Transition> transitions_;
  std::vector<Arc> arcs_;
  Marking initial_;
  Marking final_;
};

/// Workflow-net shape: one source place (empty preset), one sink place (empty
/// postset), initial = {source:1}, final = {sink:1}, every node on a
/// source-to-sink path. Returns the violated conditions (empty when fine).
std::vector<std::string> workflow_net_violations(const PetriNet& net);

/// Place-bordered recursive translation with explicit tau split/join.
/// Throws PowlError when the model has critical diagnostics.
PetriNet to_petri_net(const Model& model);

/// Fuses tau transitions that merely connect two private places
/// (sequence-of-places reduction). Preserves the visible language.
PetriNet reduce_silent(const PetriNet& net);

std::string write_pnml(const PetriNet& net);
std::string write_dot(const PetriNet& net);

}  // namespace powlgen::petri

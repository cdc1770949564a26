#include "powlgen/petri_net.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

#include "powlgen/order.hpp"

namespace powlgen::petri {

std::size_t PetriNet::add_place(std::string id) {
  places_.push_back({std::move(id)});
  initial_.push_back(0);
  final_.push_back(0);
  return places_.size() - 1;
}

std::size_t PetriNet::add_transition(std::string id, std::optional<std::string> label) {
  transitions_.push_back({std::move(id), std::move(label), {}, {}});
  return transitions_.size() - 1;
}

void PetriNet::add_input(std::size_t place, std::size_t transition) {
  transitions_.at(transition).inputs.push_back(place);
  arcs_.push_back({true, place, transition});
}

void PetriNet::add_output(std::size_t transition, std::size_t place) {
  transitions_.at(transition).outputs.push_back(place);
  arcs_.push_back({false, place, transition});
}

std::optional<std::size_t> PetriNet::find_place(const std::string& id) const {
  for (std::size_t i = 0; i < places_.size(); ++i)
    if (places_[i].id == id) return i;
  return std::nullopt;
}

bool PetriNet::enabled(const Marking& m, std::size_t t) const {
  for (auto p : transitions_[t].inputs)
    if (m[p] < 1) return false;
  return true;
}

Marking PetriNet::fire(const Marking& m, std::size_t t) const {
  Marking out = m;
  for (auto p : transitions_[t].inputs) --out[p];
  for (auto p : transitions_[t].outputs) ++out[p];
  return out;
}

std::vector<std::string> workflow_net_violations(const PetriNet& net) {
  std::vector<std::string> problems;
  const auto np = net.places().size();
  const auto nt = net.transitions().size();
  std::vector<bool> has_pre(np, false), has_post(np, false);
  for (const auto& t : net.transitions()) {
    for (auto p : t.outputs) has_pre[p] = true;
    for (auto p : t.inputs) has_post[p] = true;
  }
  std::vector<std::size_t> sources, sinks;
  for (std::size_t p = 0; p < np; ++p) {
    if (!has_pre[p]) sources.push_back(p);
    if (!has_post[p]) sinks.push_back(p);
  }
  if (sources.size() != 1) problems.push_back("expected exactly one source place, found " + std::to_string(sources.size()));
  if (sinks.size() != 1) problems.push_back("expected exactly one sink place, found " + std::to_string(sinks.size()));
  if (!problems.empty()) return problems;

  Marking expected_initial = net.empty_marking();
  expected_initial[sources[0]] = 1;
  Marking expected_final = net.empty_marking();
  expected_final[sinks[0]] = 1;
  if (net.initial_marking() != expected_initial) problems.push_back("initial marking is not {source:1}");
  if (net.final_marking() != expected_final) problems.push_back("final marking is not {sink:1}");

  // Nodes: places [0, np), transitions [np, np + nt).
  std::vector<std::vector<std::size_t>> fwd(np + nt), bwd(np + nt);
  for (std::size_t t = 0; t < nt; ++t) {
    for (auto p : net.transitions()[t].inputs) {
      fwd[p].push_back(np + t);
      bwd[np + t].push_back(p);
    }
    for (auto p : net.transitions()[t].outputs) {
      fwd[np + t].push_back(p);
      bwd[p].push_back(np + t);
    }
  }
  auto reach = [&](std::size_t start, const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<bool> seen(np + nt, false);
    std::queue<std::size_t> q;
    q.push(start);
    seen[start] = true;
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      for (auto w : adj[v])
        if (!seen[w]) {
          seen[w] = true;
          q.push(w);
        }
    }
    return seen;
  };
  auto from_source = reach(sources[0], fwd);
  auto to_sink = reach(sinks[0], bwd);
  for (std::size_t v = 0; v < np + nt; ++v) {
    if (!from_source[v] || !to_sink[v]) {
      std::string id = v < np ? net.places()[v].id : net.transitions()[v - np].id;
      problems.push_back(id + " is not on a path from source to sink");
    }
  }
  return problems;
}

namespace {

class NetBuilder {
 public:
  PetriNet build(const Model& model) {
    auto source = net_.add_place("source");
    auto sink = net_.add_place("sink");
    fragment(model, source, sink);
    net_.initial_marking()[source] = 1;
    net_.final_marking()[sink] = 1;
    return std::move(net_);
  }

 private:
  std::size_t place() { return net_.add_place("p" + std::to_string(++places_)); }

  std::size_t transition(std::optional<std::string> label) {
    return net_.add_transition("t" + std::to_string(++transitions_), std::move(label));
  }

  std::size_t tau(std::size_t from, std::size_t to) {
    auto t = transition(std::nullopt);
    net_.add_input(from, t);
    net_.add_output(t, to);
    return t;
  }

  void fragment(const Model& m, std::size_t entry, std::size_t exit) {
    switch (m->kind()) {
      case NodeKind::activity: {
        auto t = transition(m->label());
        net_.add_input(entry, t);
        net_.add_output(t, exit);
        break;
      }
      case NodeKind::silent:
        tau(entry, exit);
        break;
      case NodeKind::xor_choice:
        for (const auto& c : m->children()) fragment(c, entry, exit);
        break;
      case NodeKind::loop: {
        auto p1 = place();
        auto p2 = place();
        tau(entry, p1);
        fragment(m->do_part(), p1, p2);
        fragment(m->redo_part(), p2, p1);
        tau(p2, exit);
        break;
      }
      case NodeKind::partial_order:
        order_fragment(m, entry, exit);
        break;
    }
  }

  void order_fragment(const Model& m, std::size_t entry, std::size_t exit) {
    const auto& kids = m->children();
    const auto n = kids.size();
    const EdgeSet reduced = order::transitive_reduction(n, m->edges());
    std::vector<std::size_t> node_entry(n), node_exit(n);
    for (std::size_t i = 0; i < n; ++i) {
      node_entry[i] = place();
      node_exit[i] = place();
    }

    auto split = transition(std::nullopt);
    net_.add_input(entry, split);
    for (auto i : order::minimal_nodes(n, reduced)) net_.add_output(split, node_entry[i]);

    std::map<Edge, std::size_t> buffer;
    for (const auto& e : reduced) buffer[e] = place();

    for (std::size_t i = 0; i < n; ++i) fragment(kids[i], node_entry[i], node_exit[i]);

    // tau after x's exit feeding all of its outgoing buffers
    for (std::size_t x = 0; x < n; ++x) {
      std::vector<std::size_t> outs;
      for (const auto& [e, p] : buffer)
        if (e.first == x) outs.push_back(p);
      if (outs.empty()) continue;
      auto t = transition(std::nullopt);
      net_.add_input(node_exit[x], t);
      for (auto p : outs) net_.add_output(t, p);
    }
    // tau before y's entry consuming all of its incoming buffers
    for (std::size_t y = 0; y < n; ++y) {
      std::vector<std::size_t> ins;
      for (const auto& [e, p] : buffer)
        if (e.second == y) ins.push_back(p);
      if (ins.empty()) continue;
      auto t = transition(std::nullopt);
      for (auto p : ins) net_.add_input(p, t);
      net_.add_output(t, node_entry[y]);
    }

    auto join = transition(std::nullopt);
    for (auto i : order::maximal_nodes(n, reduced)) net_.add_input(node_exit[i], join);
    net_.add_output(join, exit);
  }

  PetriNet net_;
  int places_ = 0;
  int transitions_ = 0;
};

}  // namespace

PetriNet to_petri_net(const Model& model) {
  auto report = validate(model);
  if (!report.is_valid()) {
    const auto& first = report.diagnostics().front();
    for (const auto& d : report.diagnostics())
      if (d.severity() == Severity::critical) throw PowlError(d.code, "cannot translate invalid model: " + d.message);
    throw PowlError(first.code, first.message);
  }
  NetBuilder b;
  return b.build(model);
}

PetriNet reduce_silent(const PetriNet& input) {
  struct T {
    std::string id;
    std::optional<std::string> label;
    std::vector<std::size_t> in, out;
    bool alive = true;
  };
  std::vector<T> ts;
  for (const auto& t : input.transitions()) ts.push_back({t.id, t.label, t.inputs, t.outputs});
  const auto np = input.places().size();
  std::vector<bool> place_alive(np, true);
  const auto& init = input.initial_marking();
  const auto& fin = input.final_marking();

  auto replace_place = [&](std::size_t from, std::size_t to) {
    for (auto& t : ts) {
      if (!t.alive) continue;
      std::replace(t.in.begin(), t.in.end(), from, to);
      std::replace(t.out.begin(), t.out.end(), from, to);
    }
    place_alive[from] = false;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t ti = 0; ti < ts.size() && !changed; ++ti) {
      auto& t = ts[ti];
      if (!t.alive || t.label || t.in.size() != 1 || t.out.size() != 1) continue;
      const auto p = t.in[0];
      const auto q = t.out[0];
      if (p == q) continue;
      std::size_t p_consumers = 0, q_producers = 0;
      for (const auto& u : ts) {
        if (!u.alive) continue;
        p_consumers += std::count(u.in.begin(), u.in.end(), p);
        q_producers += std::count(u.out.begin(), u.out.end(), q);
      }
      if (p_consumers != 1 || q_producers != 1) continue;
      const bool p_marked = init[p] || fin[p];
      const bool q_marked = init[q] || fin[q];
      if (p_marked && q_marked) continue;
      t.alive = false;
      if (q_marked)
        replace_place(p, q);
      else
        replace_place(q, p);
      changed = true;
    }
  }

  PetriNet out;
  std::vector<std::size_t> remap(np, 0);
  for (std::size_t p = 0; p < np; ++p) {
    if (!place_alive[p]) continue;
    remap[p] = out.add_place(input.places()[p].id);
    out.initial_marking()[remap[p]] = init[p];
    out.final_marking()[remap[p]] = fin[p];
  }
  for (const auto& t : ts) {
    if (!t.alive) continue;
    auto nt = out.add_transition(t.id, t.label);
    for (auto p : t.in) out.add_input(remap[p], nt);
    for (auto p : t.out) out.add_output(nt, remap[p]);
  }
  return out;
}

}  // namespace powlgen::petri

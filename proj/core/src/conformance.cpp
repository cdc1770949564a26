#include "powlgen/conformance.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

namespace powlgen::conformance {

using petri::Marking;
using petri::PetriNet;

namespace {

constexpr std::size_t kMaxStates = 200000;

struct MarkingHash {
  std::size_t operator()(const Marking& m) const {
    std::size_t h = 1469598103934665603ull;
    for (int v : m) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
    return h;
  }
};

struct Index {
  std::map<std::string, std::vector<std::size_t>> by_label;
  std::vector<std::size_t> silent;

  explicit Index(const PetriNet& net) {
    for (std::size_t t = 0; t < net.transitions().size(); ++t) {
      const auto& tr = net.transitions()[t];
      if (tr.silent())
        silent.push_back(t);
      else
        by_label[*tr.label].push_back(t);
    }
  }

  const std::vector<std::size_t>* labeled(const std::string& label) const {
    auto it = by_label.find(label);
    return it == by_label.end() ? nullptr : &it->second;
  }
};

long token_sum(const Marking& m) { return std::accumulate(m.begin(), m.end(), 0L); }

void count_firing(const PetriNet& net, std::size_t t, ReplayCounters& k) {
  k.consumed += static_cast<long>(net.transitions()[t].inputs.size());
  k.produced += static_cast<long>(net.transitions()[t].outputs.size());
}

// Breadth-first search over tau firings from `start` until `goal` accepts a
// marking. Returns the tau sequence reaching the first accepted marking.
template <typename Goal>
std::optional<std::vector<std::size_t>> tau_path(const PetriNet& net, const Index& idx, const Marking& start,
                                                  Goal goal) {
  struct Node {
    Marking marking;
    std::size_t parent;
    std::size_t via;
  };
  std::vector<Node> nodes{{start, 0, 0}};
  std::unordered_set<Marking, MarkingHash> seen{start};
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    if (goal(nodes[head].marking)) {
      std::vector<std::size_t> path;
      for (auto at = head; at != 0; at = nodes[at].parent) path.push_back(nodes[at].via);
      std::reverse(path.begin(), path.end());
      return path;
    }
    if (nodes.size() >= kMaxStates) continue;
    for (auto t : idx.silent) {
      if (!net.enabled(nodes[head].marking, t)) continue;
      auto next = net.fire(nodes[head].marking, t);
      if (seen.insert(next).second) nodes.push_back({std::move(next), head, t});
    }
  }
  return std::nullopt;
}

// Complete replay of the trace ending exactly in the final marking, if any.
std::optional<ReplayCounters> exact_replay(const PetriNet& net, const Index& idx, const Trace& trace) {
  for (const auto& a : trace)
    if (!idx.labeled(a)) return std::nullopt;
  struct Node {
    std::size_t pos;
    Marking marking;
    std::size_t parent;
    std::size_t via;
  };
  std::vector<Node> nodes{{0, net.initial_marking(), 0, 0}};
  std::vector<std::unordered_set<Marking, MarkingHash>> seen(trace.size() + 1);
  seen[0].insert(net.initial_marking());
  auto push = [&](std::size_t pos, Marking m, std::size_t parent, std::size_t via) {
    if (seen[pos].insert(m).second) nodes.push_back({pos, std::move(m), parent, via});
  };
  for (std::size_t head = 0; head < nodes.size() && nodes.size() < kMaxStates; ++head) {
    const auto pos = nodes[head].pos;
    if (pos == trace.size() && nodes[head].marking == net.final_marking()) {
      ReplayCounters k;
      k.produced = token_sum(net.initial_marking());
      for (auto at = head; at != 0; at = nodes[at].parent) count_firing(net, nodes[at].via, k);
      k.consumed += token_sum(net.final_marking());
      return k;
    }
    for (auto t : idx.silent)
      if (net.enabled(nodes[head].marking, t)) push(pos, net.fire(nodes[head].marking, t), head, t);
    if (pos < trace.size())
      for (auto t : *idx.labeled(trace[pos]))
        if (net.enabled(nodes[head].marking, t)) push(pos + 1, net.fire(nodes[head].marking, t), head, t);
  }
  return std::nullopt;
}

ReplayCounters greedy_replay(const PetriNet& net, const Index& idx, const Trace& trace) {
  ReplayCounters k;
  Marking m = net.initial_marking();
  k.produced = token_sum(m);
  auto fire = [&](std::size_t t) {
    count_firing(net, t, k);
    m = net.fire(m, t);
  };

  for (const auto& a : trace) {
    const auto* cands = idx.labeled(a);
    if (!cands) {
      ++k.missing;
      ++k.consumed;
      continue;
    }
    auto ready = std::find_if(cands->begin(), cands->end(), [&](auto t) { return net.enabled(m, t); });
    if (ready != cands->end()) {
      fire(*ready);
      continue;
    }
    auto path = tau_path(net, idx, m, [&](const Marking& x) {
      return std::any_of(cands->begin(), cands->end(), [&](auto t) { return net.enabled(x, t); });
    });
    if (path) {
      for (auto t : *path) fire(t);
      fire(*std::find_if(cands->begin(), cands->end(), [&](auto t) { return net.enabled(m, t); }));
      continue;
    }
    // Force the candidate that needs the fewest inserted tokens.
    std::size_t best = cands->front();
    long best_missing = -1;
    for (auto t : *cands) {
      long missing = 0;
      for (auto p : net.transitions()[t].inputs)
        if (m[p] < 1) ++missing;
      if (best_missing < 0 || missing < best_missing) {
        best = t;
        best_missing = missing;
      }
    }
    for (auto p : net.transitions()[best].inputs)
      if (m[p] < 1) {
        ++m[p];
        ++k.missing;
      }
    fire(best);
  }

  const auto& fin = net.final_marking();
  auto path = tau_path(net, idx, m, [&](const Marking& x) { return x == fin; });
  if (!path)
    path = tau_path(net, idx, m, [&](const Marking& x) {
      for (std::size_t p = 0; p < x.size(); ++p)
        if (x[p] < fin[p]) return false;
      return true;
    });
  if (path)
    for (auto t : *path) fire(t);
  for (std::size_t p = 0; p < m.size(); ++p) {
    if (fin[p] == 0) continue;
    const int take = std::min(m[p], fin[p]);
    k.missing += fin[p] - take;
    k.consumed += fin[p];
    m[p] -= take;
  }
  k.remaining = token_sum(m);
  return k;
}

using Belief = std::set<Marking>;

Belief tau_closure(const PetriNet& net, const Index& idx, Belief b) {
  std::deque<Marking> queue(b.begin(), b.end());
  while (!queue.empty() && b.size() < kMaxStates) {
    auto cur = std::move(queue.front());
    queue.pop_front();
    for (auto t : idx.silent) {
      if (!net.enabled(cur, t)) continue;
      auto next = net.fire(cur, t);
      if (b.insert(next).second) queue.push_back(std::move(next));
    }
  }
  return b;
}

struct PrefixNode {
  std::size_t visits = 0;
  std::map<std::string, std::size_t> next;
};

}  // namespace

FitnessResult replay_fitness(const PetriNet& net, const EventLog& log) {
  Index idx(net);
  FitnessResult result;
  for (const auto& c : log.cases) {
    TraceReplay tr{c.id, false, {}};
    if (auto exact = exact_replay(net, idx, c.trace)) {
      tr.counters = *exact;
      tr.fit = true;
    } else {
      tr.counters = greedy_replay(net, idx, c.trace);
      tr.fit = tr.counters.missing == 0 && tr.counters.remaining == 0;
    }
    result.totals += tr.counters;
    result.traces.push_back(std::move(tr));
  }
  const auto& t = result.totals;
  const double missing_term = t.consumed > 0 ? 1.0 - static_cast<double>(t.missing) / t.consumed : 1.0;
  const double remaining_term = t.produced > 0 ? 1.0 - static_cast<double>(t.remaining) / t.produced : 1.0;
  result.fitness = 0.5 * missing_term + 0.5 * remaining_term;
  return result;
}

double escaping_precision(const PetriNet& net, const EventLog& log) {
  Index idx(net);
  std::vector<PrefixNode> trie(1);
  for (const auto& c : log.cases) {
    std::size_t at = 0;
    ++trie[at].visits;
    for (const auto& a : c.trace) {
      auto it = trie[at].next.find(a);
      if (it == trie[at].next.end()) {
        trie.emplace_back();
        it = trie[at].next.emplace(a, trie.size() - 1).first;
      }
      at = it->second;
      ++trie[at].visits;
    }
  }

  double escaping = 0.0;
  double allowed = 0.0;
  std::vector<std::pair<std::size_t, Belief>> stack;
  stack.emplace_back(0, tau_closure(net, idx, {net.initial_marking()}));
  while (!stack.empty()) {
    auto [node, belief] = std::move(stack.back());
    stack.pop_back();
    std::set<std::string> enabled;
    for (const auto& m : belief)
      for (const auto& [label, ts] : idx.by_label)
        if (!enabled.count(label))
          for (auto t : ts)
            if (net.enabled(m, t)) {
              enabled.insert(label);
              break;
            }
    if (!enabled.empty()) {
      std::size_t esc = 0;
      for (const auto& a : enabled)
        if (!trie[node].next.count(a)) ++esc;
      const auto w = static_cast<double>(trie[node].visits);
      escaping += w * static_cast<double>(esc);
      allowed += w * static_cast<double>(enabled.size());
    }
    for (const auto& [label, child] : trie[node].next) {
      const auto* ts = idx.labeled(label);
      if (!ts) continue;
      Belief next;
      for (const auto& m : belief)
        for (auto t : *ts)
          if (net.enabled(m, t)) next.insert(net.fire(m, t));
      if (next.empty()) continue;
      stack.emplace_back(child, tau_closure(net, idx, std::move(next)));
    }
  }
  return allowed > 0 ? 1.0 - escaping / allowed : 1.0;
}

double quality_score(double fitness, double precision) {
  const double s = fitness + precision;
  return s > 0 ? 2.0 * fitness * precision / s : 0.0;
}

ConformanceReport evaluate_model(const Model& candidate, const EventLog& truth_log, const EvaluateOptions& options) {
  ConformanceReport report;
  try {
    if (!candidate) throw std::invalid_argument("no model");
    auto net = petri::to_petri_net(candidate);
    if (options.reduce_silent) net = petri::reduce_silent(net);
    auto fit = replay_fitness(net, truth_log);
    report.fitness = fit.fitness;
    report.counters = fit.totals;
    report.per_trace = std::move(fit.traces);
    report.precision = escaping_precision(net, truth_log);
    report.quality = quality_score(report.fitness, report.precision);
  } catch (const std::exception& e) {
    report = ConformanceReport{};
    report.error = e.what();
  }
  return report;
}

nlohmann::json report_to_json(const ConformanceReport& r) {
  auto counters = [](const ReplayCounters& k) {
    return nlohmann::json{
        {"produced", k.produced}, {"consumed", k.consumed}, {"missing", k.missing}, {"remaining", k.remaining}};
  };
  nlohmann::json per_trace = nlohmann::json::array();
  for (const auto& t : r.per_trace)
    per_trace.push_back({{"case_id", t.case_id}, {"fit", t.fit}, {"counters", counters(t.counters)}});
  nlohmann::json j{{"fitness", r.fitness},
                   {"precision", r.precision},
                   {"quality", r.quality},
                   {"counters", counters(r.counters)},
                   {"per_trace", std::move(per_trace)}};
  if (r.error) j["error"] = *r.error;
  return j;
}

}  // namespace powlgen::conformance

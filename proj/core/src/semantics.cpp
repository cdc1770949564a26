#include "powlgen/semantics.hpp"

#include <functional>
#include <optional>

#include "powlgen/order.hpp"

namespace powlgen {

namespace {

struct Overflow {};

class Enumerator {
 public:
  explicit Enumerator(const SimulationConfig& cfg) : cfg_(cfg) {}

  bool truncated = false;

  std::set<Trace> language(const Model& m) {
    switch (m->kind()) {
      case NodeKind::activity:
        return {Trace{m->label()}};
      case NodeKind::silent:
        return {Trace{}};
      case NodeKind::xor_choice: {
        std::set<Trace> out;
        for (const auto& c : m->children())
          for (auto& t : language(c)) insert(out, std::move(t));
        return out;
      }
      case NodeKind::loop:
        return loop_language(m);
      case NodeKind::partial_order:
        return order_language(m);
    }
    return {};
  }

 private:
  void insert(std::set<Trace>& s, Trace t) {
    if (s.size() >= cfg_.max_variants && !s.count(t)) {
      truncated = true;
      throw Overflow{};
    }
    s.insert(std::move(t));
  }

  std::set<Trace> concat(const std::set<Trace>& a, const std::set<Trace>& b) {
    std::set<Trace> out;
    for (const auto& x : a)
      for (const auto& y : b) {
        Trace t = x;
        t.insert(t.end(), y.begin(), y.end());
        insert(out, std::move(t));
      }
    return out;
  }

  std::set<Trace> loop_language(const Model& m) {
    const auto body = language(m->do_part());
    const auto redo = language(m->redo_part());
    const auto step = concat(redo, body);
    std::set<Trace> out;
    std::set<Trace> current = body;
    for (int k = 1; k <= cfg_.loop_cap; ++k) {
      for (const auto& t : current) insert(out, t);
      if (k < cfg_.loop_cap) current = concat(current, step);
    }
    return out;
  }

  std::set<Trace> order_language(const Model& m) {
    const auto& kids = m->children();
    const auto n = kids.size();
    std::vector<std::vector<Trace>> langs;
    for (const auto& c : kids) {
      auto l = language(c);
      langs.emplace_back(l.begin(), l.end());
    }
    auto closed = order::transitive_closure(n, m->edges());
    if (!closed) throw SimulationError("partial order is cyclic");
    std::vector<std::vector<std::size_t>> preds(n);
    for (auto [i, j] : *closed) preds[j].push_back(i);

    std::set<Trace> out;
    std::vector<std::size_t> choice(n, 0);
    std::vector<const Trace*> picked(n);
    std::vector<std::size_t> pos(n, 0);
    Trace prefix;
    std::size_t total = 0;

    auto finished = [&](std::size_t i) { return pos[i] == picked[i]->size(); };
    // Depth-first over interleavings: node i may emit once all its predecessors finished.
    std::function<void()> shuffle = [&]() {
      if (prefix.size() == total) {
        insert(out, prefix);
        return;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (finished(i)) continue;
        bool ready = true;
        for (auto p : preds[i])
          if (!finished(p)) {
            ready = false;
            break;
          }
        if (!ready) continue;
        prefix.push_back((*picked[i])[pos[i]]);
        ++pos[i];
        shuffle();
        --pos[i];
        prefix.pop_back();
      }
    };

    // Cartesian product over per-node trace choices.
    while (true) {
      total = 0;
      for (std::size_t i = 0; i < n; ++i) {
        picked[i] = &langs[i][choice[i]];
        total += picked[i]->size();
      }
      shuffle();
      std::size_t k = 0;
      while (k < n && ++choice[k] == langs[k].size()) choice[k++] = 0;
      if (k == n) break;
    }
    return out;
  }

  const SimulationConfig& cfg_;
};

}  // namespace

VariantSet enumerate_variants(const Model& model, const SimulationConfig& cfg) {
  if (cfg.loop_cap < 1) throw SimulationError("loop_cap must be >= 1");
  if (cfg.max_variants < 1) throw SimulationError("max_variants must be >= 1");
  if (!model) throw SimulationError("no model");
  auto report = validate(model);
  for (const auto& d : report.diagnostics())
    if (d.severity() == Severity::critical) throw SimulationError("invalid model: " + to_string(d));
  Enumerator e(cfg);
  VariantSet result;
  try {
    result.traces = e.language(model);
  } catch (const Overflow&) {
    result.truncated = true;
  }
  return result;
}

EventLog simulate_log(const Model& model, const SimulationConfig& cfg) {
  auto variants = enumerate_variants(model, cfg);
  if (variants.truncated)
    throw SimulationError("variant enumeration exceeded max_variants=" + std::to_string(cfg.max_variants));
  EventLog log;
  std::size_t i = 0;
  for (const auto& t : variants.traces) log.cases.push_back({"c" + std::to_string(++i), t});
  return log;
}

}  // namespace powlgen

#include "powlgen/model.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "powlgen/order.hpp"
#include "util.hpp"

namespace powlgen {

Model activity(std::string label) {
  std::string trimmed = detail::trim(label);
  if (trimmed.empty()) throw PowlError(DiagCode::invalid_label, "activity label must not be empty");
  return std::make_shared<const PowlNode>(PowlNode::Token{}, NodeKind::activity, std::move(trimmed),
                                          std::vector<Model>{}, EdgeSet{});
}

Model silent() {
  return std::make_shared<const PowlNode>(PowlNode::Token{}, NodeKind::silent, std::string{},
                                          std::vector<Model>{}, EdgeSet{});
}

Model xor_of(std::vector<Model> children) {
  if (children.size() < 2)
    throw PowlError(DiagCode::xor_arity, "xor takes at least 2 sub-models, got " + std::to_string(children.size()));
  for (const auto& c : children)
    if (!c) throw std::invalid_argument("xor child is null");
  return std::make_shared<const PowlNode>(PowlNode::Token{}, NodeKind::xor_choice, std::string{},
                                          std::move(children), EdgeSet{});
}

Model loop(Model do_part, Model redo_part) {
  if (!do_part || !redo_part) throw std::invalid_argument("loop parts must not be null");
  return std::make_shared<const PowlNode>(PowlNode::Token{}, NodeKind::loop, std::string{},
                                          std::vector<Model>{std::move(do_part), std::move(redo_part)},
                                          EdgeSet{});
}

Model partial_order(std::vector<Model> nodes, EdgeSet edges) {
  if (nodes.empty()) throw PowlError(DiagCode::empty_partial_order, "partial order needs at least one node");
  for (const auto& c : nodes)
    if (!c) throw std::invalid_argument("partial order node is null");
  for (auto [i, j] : edges)
    if (i >= nodes.size() || j >= nodes.size())
      throw std::out_of_range("partial order edge (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") references a missing node");
  return std::make_shared<const PowlNode>(PowlNode::Token{}, NodeKind::partial_order, std::string{},
                                          std::move(nodes), std::move(edges));
}

namespace {

Model rebuild(const PowlNode& node, std::vector<Model> children, EdgeSet edges) {
  switch (node.kind()) {
    case NodeKind::activity:
      return activity(node.label());
    case NodeKind::silent:
      return silent();
    case NodeKind::xor_choice:
      return xor_of(std::move(children));
    case NodeKind::loop:
      return loop(children.at(0), children.at(1));
    case NodeKind::partial_order:
      return partial_order(std::move(children), std::move(edges));
  }
  return nullptr;
}

std::string describe(const Model& m, std::size_t budget = 48) {
  std::string out;
  switch (m->kind()) {
    case NodeKind::activity:
      out = "'" + m->label() + "'";
      break;
    case NodeKind::silent:
      out = "None";
      break;
    default: {
      out = std::string(kind_name(m->kind())) + "(";
      for (std::size_t i = 0; i < m->children().size(); ++i) {
        if (i) out += ", ";
        out += describe(m->children()[i], budget);
        if (out.size() > budget) break;
      }
      out += ")";
    }
  }
  if (out.size() > budget) out = out.substr(0, budget) + "...";
  return out;
}

std::string child_path(const std::string& parent, const PowlNode& node, std::size_t i) {
  switch (node.kind()) {
    case NodeKind::xor_choice:
      return parent + "/xor." + std::to_string(i);
    case NodeKind::loop:
      return parent + (i == 0 ? "/loop.do" : "/loop.redo");
    default:
      return parent + "/po." + std::to_string(i);
  }
}

// Indices of one directed cycle, or empty.
std::vector<std::size_t> find_cycle(std::size_t n, const EdgeSet& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [i, j] : edges)
    if (i != j) adj[i].push_back(j);
  std::vector<int> state(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> cycle;
  std::function<bool(std::size_t)> dfs = [&](std::size_t v) {
    state[v] = 1;
    stack.push_back(v);
    for (auto w : adj[v]) {
      if (state[w] == 1) {
        auto it = std::find(stack.begin(), stack.end(), w);
        cycle.assign(it, stack.end());
        return true;
      }
      if (state[w] == 0 && dfs(w)) return true;
    }
    stack.pop_back();
    state[v] = 2;
    return false;
  };
  for (std::size_t v = 0; v < n; ++v)
    if (state[v] == 0 && dfs(v)) break;
  return cycle;
}

void validate_rec(const Model& m, const std::string& path, std::unordered_set<const PowlNode*>& seen,
                  ValidationReport& report) {
  if (!seen.insert(m.get()).second) {
    report.add({DiagCode::submodel_reuse,
                "sub-model " + describe(m) +
                    " is used at more than one position of the model; create another instance with .copy()",
                path});
    return;
  }
  if (m->kind() == NodeKind::partial_order) {
    const auto n = m->children().size();
    EdgeSet proper;
    for (auto [i, j] : m->edges()) {
      if (i == j) {
        report.add({DiagCode::irreflexivity_violation,
                    "partial order contains the edge (" + describe(m->children()[i]) + ", " +
                        describe(m->children()[i]) + "); a node cannot precede itself",
                    path});
      } else {
        proper.emplace(i, j);
      }
    }
    auto cycle = find_cycle(n, proper);
    if (!cycle.empty()) {
      std::string chain;
      for (auto v : cycle) chain += describe(m->children()[v]) + " -> ";
      chain += describe(m->children()[cycle.front()]);
      report.add({DiagCode::order_cycle,
                  "partial order dependencies form a cycle " + chain +
                      "; its transitive closure would make a node precede itself",
                  path});
    }
  }
  for (std::size_t i = 0; i < m->children().size(); ++i)
    validate_rec(m->children()[i], child_path(path, *m, i), seen, report);
}

void walk(const Model& m, const std::function<void(const Model&)>& f) {
  f(m);
  for (const auto& c : m->children()) walk(c, f);
}

// Structural hashing and equality for structural_equal.
class Equality {
 public:
  bool equal(const Model& a, const Model& b) {
    if (a == b) return true;
    if (a->kind() != b->kind()) return false;
    if (hash(a) != hash(b)) return false;
    auto key = std::make_pair(a.get(), b.get());
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool result = compare(a, b);
    memo_[key] = result;
    return result;
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t v) {
    v *= 0x9e3779b97f4a7c15ULL;
    v ^= v >> 31;
    return (seed ^ v) * 0xbf58476d1ce4e5b9ULL + (seed << 6) + (seed >> 2);
  }

  const EdgeSet& closed(const Model& m) {
    auto it = closures_.find(m.get());
    if (it != closures_.end()) return it->second;
    auto c = order::transitive_closure(m->children().size(), m->edges());
    // Cyclic orders are never equal to anything but themselves; keep raw edges.
    return closures_.emplace(m.get(), c ? *c : m->edges()).first->second;
  }

  std::uint64_t hash(const Model& m) {
    if (auto it = hashes_.find(m.get()); it != hashes_.end()) return it->second;
    std::uint64_t h = mix(0x51ed27, static_cast<std::uint64_t>(m->kind()) + 1);
    switch (m->kind()) {
      case NodeKind::activity:
        h = mix(h, std::hash<std::string>{}(m->label()));
        break;
      case NodeKind::silent:
        break;
      case NodeKind::xor_choice: {
        std::vector<std::uint64_t> hs;
        for (const auto& c : m->children()) hs.push_back(hash(c));
        std::sort(hs.begin(), hs.end());
        for (auto x : hs) h = mix(h, x);
        break;
      }
      case NodeKind::loop:
        h = mix(mix(h, hash(m->do_part())), hash(m->redo_part()));
        break;
      case NodeKind::partial_order: {
        auto sigs = signatures(m);
        std::sort(sigs.begin(), sigs.end());
        for (auto x : sigs) h = mix(h, x);
        break;
      }
    }
    hashes_[m.get()] = h;
    return h;
  }

  std::vector<std::uint64_t> signatures(const Model& m) {
    const auto& kids = m->children();
    const auto& edges = closed(m);
    std::vector<std::vector<std::uint64_t>> preds(kids.size()), succs(kids.size());
    for (auto [i, j] : edges) {
      succs[i].push_back(hash(kids[j]));
      preds[j].push_back(hash(kids[i]));
    }
    std::vector<std::uint64_t> sigs;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      std::sort(preds[i].begin(), preds[i].end());
      std::sort(succs[i].begin(), succs[i].end());
      std::uint64_t s = mix(17, hash(kids[i]));
      for (auto x : preds[i]) s = mix(s, x);
      s = mix(s, 0xabcdef);
      for (auto x : succs[i]) s = mix(s, x);
      sigs.push_back(s);
    }
    return sigs;
  }

  bool compare(const Model& a, const Model& b) {
    switch (a->kind()) {
      case NodeKind::activity:
        return a->label() == b->label();
      case NodeKind::silent:
        return true;
      case NodeKind::loop:
        return equal(a->do_part(), b->do_part()) && equal(a->redo_part(), b->redo_part());
      case NodeKind::xor_choice: {
        const auto& ka = a->children();
        const auto& kb = b->children();
        if (ka.size() != kb.size()) return false;
        // equal() is an equivalence, so greedy matching within classes suffices.
        std::vector<bool> used(kb.size(), false);
        for (const auto& x : ka) {
          bool found = false;
          for (std::size_t j = 0; j < kb.size() && !found; ++j)
            if (!used[j] && equal(x, kb[j])) used[j] = found = true;
          if (!found) return false;
        }
        return true;
      }
      case NodeKind::partial_order:
        return compare_orders(a, b);
    }
    return false;
  }

  bool compare_orders(const Model& a, const Model& b) {
    const auto& ka = a->children();
    const auto& kb = b->children();
    const auto& ea = closed(a);
    const auto& eb = closed(b);
    if (ka.size() != kb.size() || ea.size() != eb.size()) return false;
    auto sa = signatures(a);
    auto sb = signatures(b);
    std::vector<std::size_t> assign(ka.size());
    std::vector<bool> used(kb.size(), false);
    std::function<bool(std::size_t)> place = [&](std::size_t i) {
      if (i == ka.size()) return true;
      for (std::size_t j = 0; j < kb.size(); ++j) {
        if (used[j] || sa[i] != sb[j] || !equal(ka[i], kb[j])) continue;
        bool consistent = true;
        for (std::size_t k = 0; k < i && consistent; ++k) {
          consistent = ea.count({k, i}) == eb.count({assign[k], j}) &&
                       ea.count({i, k}) == eb.count({j, assign[k]});
        }
        if (!consistent) continue;
        used[j] = true;
        assign[i] = j;
        if (place(i + 1)) return true;
        used[j] = false;
      }
      return false;
    };
    return place(0);
  }

  std::unordered_map<const PowlNode*, std::uint64_t> hashes_;
  std::unordered_map<const PowlNode*, EdgeSet> closures_;
  std::map<std::pair<const PowlNode*, const PowlNode*>, bool> memo_;
};

}  // namespace

std::string_view kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::activity:
      return "activity";
    case NodeKind::silent:
      return "silent";
    case NodeKind::xor_choice:
      return "xor";
    case NodeKind::loop:
      return "loop";
    case NodeKind::partial_order:
      return "partial_order";
  }
  return "unknown";
}

Model deep_copy(const Model& model) {
  std::vector<Model> kids;
  kids.reserve(model->children().size());
  for (const auto& c : model->children()) kids.push_back(deep_copy(c));
  return rebuild(*model, std::move(kids), model->edges());
}

ValidationReport validate(const Model& model) {
  ValidationReport report;
  std::unordered_set<const PowlNode*> seen;
  validate_rec(model, "root", seen, report);
  return report;
}

Model close_order(const Model& po) {
  if (po->kind() != NodeKind::partial_order)
    throw std::invalid_argument("close_order expects a partial order node");
  auto closed = order::transitive_closure(po->children().size(), po->edges());
  if (!closed)
    throw PowlError(DiagCode::order_cycle, "transitive closure of the partial order contains a cycle");
  if (*closed == po->edges()) return po;
  return partial_order(po->children(), std::move(*closed));
}

Model close_all_orders(const Model& model) {
  std::unordered_map<const PowlNode*, Model> memo;
  std::function<Model(const Model&)> rec = [&](const Model& m) -> Model {
    if (auto it = memo.find(m.get()); it != memo.end()) return it->second;
    std::vector<Model> kids;
    bool changed = false;
    for (const auto& c : m->children()) {
      kids.push_back(rec(c));
      changed |= kids.back() != c;
    }
    Model out = m;
    if (changed) out = rebuild(*m, std::move(kids), m->edges());
    if (out->kind() == NodeKind::partial_order) out = close_order(out);
    memo[m.get()] = out;
    return out;
  };
  return rec(model);
}

AutoFixResult auto_fix_reuse(const Model& model) {
  std::unordered_set<const PowlNode*> seen;
  std::size_t fixed = 0;
  std::function<Model(const Model&)> rec = [&](const Model& m) -> Model {
    if (!seen.insert(m.get()).second) {
      ++fixed;
      return deep_copy(m);
    }
    std::vector<Model> kids;
    bool changed = false;
    for (const auto& c : m->children()) {
      kids.push_back(rec(c));
      changed |= kids.back() != c;
    }
    return changed ? rebuild(*m, std::move(kids), m->edges()) : m;
  };
  Model out = rec(model);
  return {std::move(out), fixed};
}

bool structural_equal(const Model& a, const Model& b) {
  Equality eq;
  return eq.equal(a, b);
}

ModelStats stats(const Model& model) {
  ModelStats s;
  walk(model, [&](const Model& m) {
    switch (m->kind()) {
      case NodeKind::activity:
        ++s.activities;
        break;
      case NodeKind::silent:
        ++s.silents;
        break;
      case NodeKind::xor_choice:
        ++s.choices;
        break;
      case NodeKind::loop:
        ++s.loops;
        break;
      case NodeKind::partial_order:
        ++s.partial_orders;
        break;
    }
  });
  return s;
}

std::vector<std::string> activity_labels(const Model& model) {
  std::set<std::string> labels;
  walk(model, [&](const Model& m) {
    if (m->is_activity()) labels.insert(m->label());
  });
  return {labels.begin(), labels.end()};
}

bool contains_loop(const Model& model) {
  bool found = false;
  walk(model, [&](const Model& m) { found |= m->kind() == NodeKind::loop; });
  return found;
}

}  // namespace powlgen

#include "powlgen/bpmn.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <sstream>

#include "powlgen/order.hpp"
#include "util.hpp"

namespace powlgen::bpmn {

std::string_view kind_name(ElementKind kind) {
  switch (kind) {
    case ElementKind::start_event:
      return "startEvent";
    case ElementKind::end_event:
      return "endEvent";
    case ElementKind::task:
      return "task";
    case ElementKind::exclusive_gateway:
      return "exclusiveGateway";
    case ElementKind::parallel_gateway:
      return "parallelGateway";
  }
  return "unknown";
}

std::size_t BpmnGraph::add(ElementKind kind, std::string label) {
  elements_.push_back({"", kind, std::move(label)});
  removed_.push_back(false);
  return elements_.size() - 1;
}

void BpmnGraph::connect(std::size_t from, std::size_t to) { flows_.push_back({"", from, to}); }

std::size_t BpmnGraph::in_degree(std::size_t e) const {
  return static_cast<std::size_t>(
      std::count_if(flows_.begin(), flows_.end(), [&](const Flow& f) { return f.target == e; }));
}

std::size_t BpmnGraph::out_degree(std::size_t e) const {
  return static_cast<std::size_t>(
      std::count_if(flows_.begin(), flows_.end(), [&](const Flow& f) { return f.source == e; }));
}

std::size_t BpmnGraph::count(ElementKind kind) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < elements_.size(); ++i)
    if (!removed_[i] && elements_[i].kind == kind) ++n;
  return n;
}

void BpmnGraph::elide_trivial_gateways() {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
      if (removed_[e]) continue;
      const auto kind = elements_[e].kind;
      if (kind != ElementKind::exclusive_gateway && kind != ElementKind::parallel_gateway) continue;
      if (in_degree(e) != 1 || out_degree(e) != 1) continue;
      auto in = std::find_if(flows_.begin(), flows_.end(), [&](const Flow& f) { return f.target == e; });
      auto out = std::find_if(flows_.begin(), flows_.end(), [&](const Flow& f) { return f.source == e; });
      const auto target = out->target;
      in->target = target;
      flows_.erase(out);
      removed_[e] = true;
      changed = true;
    }
  }
}

void BpmnGraph::finalize() {
  std::vector<std::size_t> remap(elements_.size(), 0);
  std::vector<Element> kept;
  int tasks = 0, gateways = 0;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (removed_[i]) continue;
    remap[i] = kept.size();
    Element el = elements_[i];
    switch (el.kind) {
      case ElementKind::start_event:
        el.id = "start";
        break;
      case ElementKind::end_event:
        el.id = "end";
        break;
      case ElementKind::task:
        el.id = "task_" + std::to_string(++tasks);
        break;
      default:
        el.id = "gateway_" + std::to_string(++gateways);
    }
    kept.push_back(std::move(el));
  }
  for (std::size_t i = 0; i < flows_.size(); ++i) {
    flows_[i].source = remap[flows_[i].source];
    flows_[i].target = remap[flows_[i].target];
    flows_[i].id = "flow_" + std::to_string(i + 1);
  }
  elements_ = std::move(kept);
  removed_.assign(elements_.size(), false);
}

namespace {

// A translated sub-model: entry and exit elements, or nothing (pure flow).
struct Fragment {
  std::optional<std::size_t> in;
  std::optional<std::size_t> out;
  bool empty() const { return !in.has_value(); }
};

class Builder {
 public:
  explicit Builder(BpmnGraph& g) : g_(g) {}

  void link(std::size_t from, const Fragment& f, std::size_t to) {
    if (f.empty()) {
      g_.connect(from, to);
    } else {
      g_.connect(from, *f.in);
      g_.connect(*f.out, to);
    }
  }

  Fragment build(const Model& m) {
    switch (m->kind()) {
      case NodeKind::activity: {
        auto t = g_.add(ElementKind::task, m->label());
        return {t, t};
      }
      case NodeKind::silent:
        return {};
      case NodeKind::xor_choice: {
        auto split = g_.add(ElementKind::exclusive_gateway);
        auto join = g_.add(ElementKind::exclusive_gateway);
        for (const auto& c : m->children()) link(split, build(c), join);
        return {split, join};
      }
      case NodeKind::loop: {
        auto join = g_.add(ElementKind::exclusive_gateway);
        auto split = g_.add(ElementKind::exclusive_gateway);
        link(join, build(m->do_part()), split);
        link(split, build(m->redo_part()), join);
        return {join, split};
      }
      case NodeKind::partial_order:
        return build_order(m);
    }
    return {};
  }

 private:
  Fragment build_order(const Model& m) {
    const auto& kids = m->children();
    std::vector<Fragment> frags;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      frags.push_back(build(kids[i]));
      if (!frags.back().empty()) keep.push_back(i);
    }
    if (keep.empty()) return {};

    // Order restricted to non-empty fragments: closure first so that
    // dependencies through silent nodes survive.
    auto closed = order::transitive_closure(kids.size(), m->edges()).value_or(m->edges());
    std::vector<std::size_t> local(kids.size(), 0);
    for (std::size_t k = 0; k < keep.size(); ++k) local[keep[k]] = k;
    EdgeSet restricted;
    for (auto [i, j] : closed)
      if (!frags[i].empty() && !frags[j].empty()) restricted.emplace(local[i], local[j]);
    const auto n = keep.size();
    EdgeSet reduced = order::transitive_reduction(n, restricted);

    std::vector<std::vector<std::size_t>> preds(n), succs(n);
    for (auto [i, j] : reduced) {
      succs[i].push_back(j);
      preds[j].push_back(i);
    }

    auto split = g_.add(ElementKind::parallel_gateway);
    auto join = g_.add(ElementKind::parallel_gateway);

    std::vector<std::size_t> connector(n);
    for (std::size_t x = 0; x < n; ++x) {
      const auto& f = frags[keep[x]];
      const std::size_t fan_out = succs[x].empty() ? 1 : succs[x].size();
      if (fan_out >= 2) {
        auto s = g_.add(ElementKind::parallel_gateway);
        g_.connect(*f.out, s);
        connector[x] = s;
      } else {
        connector[x] = *f.out;
      }
    }
    for (std::size_t y = 0; y < n; ++y) {
      const auto& f = frags[keep[y]];
      std::vector<std::size_t> sources;
      if (preds[y].empty())
        sources.push_back(split);
      else
        for (auto p : preds[y]) sources.push_back(connector[p]);
      if (sources.size() >= 2) {
        auto j = g_.add(ElementKind::parallel_gateway);
        for (auto s : sources) g_.connect(s, j);
        g_.connect(j, *f.in);
      } else {
        g_.connect(sources.front(), *f.in);
      }
    }
    for (std::size_t x = 0; x < n; ++x)
      if (succs[x].empty()) g_.connect(connector[x], join);
    return {split, join};
  }

  BpmnGraph& g_;
};

}  // namespace

BpmnGraph to_bpmn(const Model& model, const BpmnOptions& options) {
  auto report = validate(model);
  for (const auto& d : report.diagnostics())
    if (d.severity() == Severity::critical) throw PowlError(d.code, "cannot translate invalid model: " + d.message);
  BpmnGraph g;
  auto start = g.add(ElementKind::start_event);
  Builder b(g);
  auto body = b.build(model);
  auto end = g.add(ElementKind::end_event);
  b.link(start, body, end);
  if (options.elide_trivial_gateways) g.elide_trivial_gateways();
  g.finalize();
  return g;
}

std::vector<std::string> graph_violations(const BpmnGraph& g) {
  std::vector<std::string> problems;
  const auto& els = g.elements();
  if (g.count(ElementKind::start_event) != 1) problems.push_back("expected exactly one start event");
  if (g.count(ElementKind::end_event) != 1) problems.push_back("expected exactly one end event");
  for (std::size_t e = 0; e < els.size(); ++e) {
    const auto in = g.in_degree(e);
    const auto out = g.out_degree(e);
    switch (els[e].kind) {
      case ElementKind::start_event:
        if (in != 0 || out != 1) problems.push_back("start event must have one outgoing flow only");
        break;
      case ElementKind::end_event:
        if (in != 1 || out != 0) problems.push_back("end event must have one incoming flow only");
        break;
      case ElementKind::task:
        if (in != 1 || out != 1) problems.push_back("task " + els[e].id + " must have one incoming and one outgoing flow");
        break;
      default:
        if (in < 1 || out < 1 || (in == 1 && out == 1))
          problems.push_back("gateway " + els[e].id + " is neither a split nor a join");
    }
  }
  // Connectivity: everything reachable from start and co-reachable from end.
  std::vector<std::vector<std::size_t>> fwd(els.size()), bwd(els.size());
  for (const auto& f : g.flows()) {
    fwd[f.source].push_back(f.target);
    bwd[f.target].push_back(f.source);
  }
  auto reach = [&](std::size_t s, const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<bool> seen(els.size(), false);
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      for (auto w : adj[v])
        if (!seen[w]) seen[w] = true, q.push(w);
    }
    return seen;
  };
  std::optional<std::size_t> start, end;
  for (std::size_t e = 0; e < els.size(); ++e) {
    if (els[e].kind == ElementKind::start_event) start = e;
    if (els[e].kind == ElementKind::end_event) end = e;
  }
  if (start && end) {
    auto a = reach(*start, fwd);
    auto b = reach(*end, bwd);
    for (std::size_t e = 0; e < els.size(); ++e)
      if (!a[e] || !b[e]) problems.push_back(els[e].id + " is not on a path from start to end");
  }
  return problems;
}

std::string write_bpmn_xml(const BpmnGraph& g) {
  using detail::xml_escape;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<definitions xmlns=\"http://www.omg.org/spec/BPMN/20100524/MODEL\" id=\"definitions_1\" "
         "targetNamespace=\"http://bpmn.io/schema/bpmn\">\n";
  out << "  <process id=\"process_1\" isExecutable=\"false\">\n";
  const auto& els = g.elements();
  for (std::size_t e = 0; e < els.size(); ++e) {
    const auto& el = els[e];
    out << "    <" << kind_name(el.kind) << " id=\"" << xml_escape(el.id) << "\"";
    if (el.kind == ElementKind::task) out << " name=\"" << xml_escape(el.label) << "\"";
    if (el.kind == ElementKind::exclusive_gateway || el.kind == ElementKind::parallel_gateway) {
      const auto in = g.in_degree(e), outd = g.out_degree(e);
      const char* dir = in > 1 && outd > 1 ? "Mixed" : outd > 1 ? "Diverging" : in > 1 ? "Converging" : "Unspecified";
      out << " gatewayDirection=\"" << dir << "\"";
    }
    out << ">\n";
    for (const auto& f : g.flows())
      if (f.target == e) out << "      <incoming>" << f.id << "</incoming>\n";
    for (const auto& f : g.flows())
      if (f.source == e) out << "      <outgoing>" << f.id << "</outgoing>\n";
    out << "    </" << kind_name(el.kind) << ">\n";
  }
  for (const auto& f : g.flows())
    out << "    <sequenceFlow id=\"" << f.id << "\" sourceRef=\"" << xml_escape(els[f.source].id)
        << "\" targetRef=\"" << xml_escape(els[f.target].id) << "\"/>\n";
  out << "  </process>\n</definitions>\n";
  return out.str();
}

std::string write_dot(const BpmnGraph& g) {
  std::ostringstream out;
  out << "digraph bpmn {\n  rankdir=LR;\n";
  for (const auto& el : g.elements()) {
    out << "  \"" << el.id << "\" [";
    switch (el.kind) {
      case ElementKind::start_event:
        out << "shape=circle,label=\"\"";
        break;
      case ElementKind::end_event:
        out << "shape=doublecircle,label=\"\"";
        break;
      case ElementKind::task:
        out << "shape=box,style=rounded,label=\"" << detail::dot_escape(el.label) << "\"";
        break;
      case ElementKind::exclusive_gateway:
        out << "shape=diamond,label=\"X\"";
        break;
      case ElementKind::parallel_gateway:
        out << "shape=diamond,label=\"+\"";
        break;
    }
    out << "];\n";
  }
  for (const auto& f : g.flows())
    out << "  \"" << g.elements()[f.source].id << "\" -> \"" << g.elements()[f.target].id << "\";\n";
  out << "}\n";
  return out.str();
}

nlohmann::json graph_to_json(const BpmnGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& el : g.elements())
    nodes.push_back({{"id", el.id}, {"kind", std::string(kind_name(el.kind))}, {"label", el.label}});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& f : g.flows())
    edges.push_back({{"id", f.id}, {"source", g.elements()[f.source].id}, {"target", g.elements()[f.target].id}});
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

}  // namespace powlgen::bpmn

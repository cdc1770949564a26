#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "powlgen/dsl.hpp"
#include "powlgen/order.hpp"
#include "util.hpp"

namespace powlgen::dsl {

namespace {

struct Abort {
  Diagnostic diagnostic;
};

struct Binding {
  Model node;
  bool consumed = false;
  bool referenced = false;
  int line = 0;
};

class Evaluator {
 public:
  EvalResult run(const ScriptAst& ast) {
    EvalResult result;
    try {
      for (const auto& st : ast.statements) {
        if (st.kind != StatementKind::assign) continue;
        current_ = &st;
        Model value = eval(st.value);
        env_[st.target] = Binding{std::move(value), false, false, st.line};
        order_.push_back(st.target);
      }
      current_ = nullptr;
      auto it = env_.find("final_model");
      if (it == env_.end())
        throw Abort{{DiagCode::missing_final_model,
                     "the script does not assign the variable 'final_model'; save the final model in a "
                     "variable named final_model",
                     ""}};
      Model root = it->second.node;

      for (const auto& name : order_) {
        const auto& b = env_.at(name);
        if (name != "final_model" && !b.consumed && !b.referenced)
          report_.add({DiagCode::unused_variable,
                       "variable '" + name + "' is never used in the final model", "line " + std::to_string(b.line)});
      }

      ValidationReport tree = validate(root);
      const bool reuse_seen = report_.has(DiagCode::submodel_reuse);
      for (const auto& d : tree.diagnostics())
        if (d.code != DiagCode::submodel_reuse || !reuse_seen) report_.add(d);

      if (report_.is_valid()) result.model = close_all_orders(root);
    } catch (const Abort& a) {
      report_.add(a.diagnostic);
    } catch (const PowlError& e) {
      report_.add({e.code(), with_line(e.what()), location()});
    }
    result.report = std::move(report_);
    return result;
  }

 private:
  std::string location() const { return current_ ? "line " + std::to_string(current_->line) : ""; }

  std::string with_line(const std::string& message) const {
    if (!current_) return message;
    return "`" + current_->source_line + "`: " + message;
  }

  [[noreturn]] void abort(DiagCode code, const std::string& message, int line) const {
    std::string where = line > 0 ? "line " + std::to_string(line) : location();
    throw Abort{{code, with_line(message), where}};
  }

  Binding& lookup(const std::string& name, int line) {
    auto it = env_.find(name);
    if (it == env_.end()) abort(DiagCode::undefined_variable, "variable '" + name + "' is not defined", line);
    return it->second;
  }

  Model consume(const std::string& name, int line) {
    Binding& b = lookup(name, line);
    if (b.consumed) {
      report_.add({DiagCode::submodel_reuse,
                   with_line("sub-model '" + name +
                             "' is already part of another sub-model; reuse it via " + name + ".copy()"),
                   "line " + std::to_string(line)});
    }
    b.consumed = true;
    return b.node;
  }

  Model eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::none_literal:
        return silent();
      case ExprKind::var_ref:
        return consume(e.text, e.line);
      case ExprKind::copy_of: {
        Binding& b = lookup(e.text, e.line);
        b.referenced = true;
        return deep_copy(b.node);
      }
      case ExprKind::activity_call:
        if (detail::trim(e.text).empty())
          abort(DiagCode::invalid_label, "activity labels must not be empty", e.line);
        return activity(e.text);
      case ExprKind::xor_call: {
        if (e.args.size() < 2)
          abort(DiagCode::xor_arity,
                "xor takes n >= 2 sub-models but got " + std::to_string(e.args.size()), e.line);
        std::vector<Model> kids;
        for (const auto& a : e.args) kids.push_back(eval(a));
        return xor_of(std::move(kids));
      }
      case ExprKind::loop_call:
        return loop(eval(e.args.at(0)), eval(e.args.at(1)));
      case ExprKind::order_call:
        return eval_order(e);
    }
    abort(DiagCode::parse_error, "unsupported expression", e.line);
  }

  Model eval_order(const Expr& e) {
    if (e.tuples.empty())
      abort(DiagCode::empty_partial_order, "partial_order needs at least one node in dependencies", e.line);
    std::vector<Model> nodes;
    std::map<std::string, std::size_t> by_name;
    EdgeSet edges;
    auto index_of = [&](const Expr& x) -> std::size_t {
      if (x.kind == ExprKind::var_ref) {
        if (auto it = by_name.find(x.text); it != by_name.end()) return it->second;
        nodes.push_back(consume(x.text, x.line));
        by_name[x.text] = nodes.size() - 1;
        return nodes.size() - 1;
      }
      nodes.push_back(eval(x));
      return nodes.size() - 1;
    };
    for (const auto& tuple : e.tuples) {
      std::vector<std::size_t> idx;
      for (const auto& x : tuple) idx.push_back(index_of(x));
      for (std::size_t k = 1; k < idx.size(); ++k) edges.emplace(idx[k - 1], idx[k]);
    }
    return partial_order(std::move(nodes), std::move(edges));
  }

  std::unordered_map<std::string, Binding> env_;
  std::vector<std::string> order_;
  ValidationReport report_;
  const Statement* current_ = nullptr;
};

// --- rendering ---

const std::set<std::string> kPythonWords = {
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue", "def",
    "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is",
    "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
    "gen", "final_model", "ModelGenerator"};

class Renderer {
 public:
  std::string run(const Model& root, const RenderOptions& options) {
    if (options.include_header) {
      out_ << "from utils.model_generation import ModelGenerator\n";
      out_ << "gen = ModelGenerator()\n";
    }
    declare_activities(root);
    if (!activity_lines_.empty()) {
      if (options.include_header) out_ << "\n";
      for (const auto& l : activity_lines_) out_ << l << "\n";
    }
    std::string root_expr = expression(root, true);
    if (!body_.empty()) {
      out_ << "\n";
      for (const auto& l : body_) out_ << l << "\n";
    }
    if (root->is_activity()) root_expr = names_.at(root.get());
    out_ << "\nfinal_model = " << root_expr << "\n";
    return out_.str();
  }

 private:
  std::string fresh(std::string base) {
    if (base.empty() || std::isdigit(static_cast<unsigned char>(base[0]))) base = "a_" + base;
    if (kPythonWords.count(base)) base += "_";
    std::string name = base;
    for (int k = 2; used_.count(name); ++k) name = base + "_" + std::to_string(k);
    used_.insert(name);
    return name;
  }

  static std::string slug(const std::string& label) {
    std::string s;
    for (char c : label) {
      if (std::isalnum(static_cast<unsigned char>(c)) && static_cast<unsigned char>(c) < 128) {
        s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      } else if (!s.empty() && s.back() != '_') {
        s += '_';
      }
    }
    while (!s.empty() && s.back() == '_') s.pop_back();
    if (s.size() > 32) {
      s.resize(32);
      while (!s.empty() && s.back() == '_') s.pop_back();
    }
    return s;
  }

  static std::string quote(const std::string& label) {
    std::string q = "'";
    for (char c : label) {
      if (c == '\\' || c == '\'') q += '\\';
      q += c;
    }
    return q + "'";
  }

  // Activities are declared up front, in preorder, like hand-written scripts.
  void declare_activities(const Model& m) {
    if (m->is_activity()) {
      std::string name = fresh(slug(m->label()));
      names_[m.get()] = name;
      activity_lines_.push_back(name + " = gen.activity(" + quote(m->label()) + ")");
      return;
    }
    for (const auto& c : m->children()) declare_activities(c);
  }

  // Returns the expression text referring to m, emitting assignments for
  // composite children first. At the root the composite call is returned
  // inline so that it is bound to final_model directly.
  std::string expression(const Model& m, bool is_root = false) {
    switch (m->kind()) {
      case NodeKind::activity:
        return names_.at(m.get());
      case NodeKind::silent:
        return "None";
      default:
        break;
    }
    std::string call = composite(m);
    if (is_root) return call;
    std::string base = m->kind() == NodeKind::xor_choice ? "choice" : m->kind() == NodeKind::loop ? "loop" : "order";
    std::string name = fresh(base + "_" + std::to_string(++counter_[base]));
    body_.push_back(name + " = " + call);
    return name;
  }

  std::string composite(const Model& m) {
    if (m->kind() == NodeKind::xor_choice) {
      std::string args;
      for (std::size_t i = 0; i < m->children().size(); ++i)
        args += (i ? ", " : "") + expression(m->children()[i]);
      return "gen.xor(" + args + ")";
    }
    if (m->kind() == NodeKind::loop)
      return "gen.loop(do=" + expression(m->do_part()) + ", redo=" + expression(m->redo_part()) + ")";

    const auto& kids = m->children();
    std::vector<std::string> refs;
    for (const auto& c : kids) {
      if (c->is_silent()) {
        std::string name = fresh("skip_" + std::to_string(++counter_["skip"]));
        body_.push_back(name + " = None");
        refs.push_back(name);
      } else {
        refs.push_back(expression(c));
      }
    }
    EdgeSet reduced = order::transitive_reduction(kids.size(), m->edges());
    std::vector<bool> mentioned(kids.size(), false);
    std::vector<std::string> items;
    for (auto [i, j] : reduced) {
      items.push_back("(" + refs[i] + ", " + refs[j] + ")");
      mentioned[i] = mentioned[j] = true;
    }
    for (std::size_t i = 0; i < kids.size(); ++i)
      if (!mentioned[i]) items.push_back("(" + refs[i] + ",)");
    std::string out = "gen.partial_order(dependencies=[";
    const std::string indent(std::string("    dependencies=[").size(), ' ');
    if (items.size() == 1) return out + items.front() + "])";
    out = "gen.partial_order(\n    dependencies=[";
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ",\n" + indent;
      out += items[i];
    }
    return out + "])";
  }

  std::ostringstream out_;
  std::vector<std::string> activity_lines_;
  std::vector<std::string> body_;
  std::unordered_map<const PowlNode*, std::string> names_;
  std::set<std::string> used_;
  std::map<std::string, int> counter_;
};

}  // namespace

EvalResult evaluate(const ScriptAst& ast) {
  Evaluator ev;
  return ev.run(ast);
}

EvalResult compile(const Script& script) {
  auto parsed = parse(script);
  if (!parsed.ast) return EvalResult{nullptr, std::move(parsed.report)};
  return evaluate(*parsed.ast);
}

Script render(const Model& model, const RenderOptions& options) {
  Renderer r;
  return Script{r.run(model, options)};
}

EvalResult compile_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return compile(Script{ss.str()});
}

}  // namespace powlgen::dsl

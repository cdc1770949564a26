// Lexer and parser for the construction language. The grammar is closed:
// anything outside the five generator calls is rejected before evaluation.

#include <cctype>
#include <map>
#include <set>
#include <variant>

#include "powlgen/dsl.hpp"
#include "util.hpp"

namespace powlgen::dsl {

namespace {

enum class Tok { ident, string, lparen, rparen, lbracket, rbracket, comma, equals, dot, newline, end, other };

struct Token {
  Tok kind;
  std::string text;
  int line;
};

struct Failure {
  Diagnostic diagnostic;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    int depth = 0;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        if (depth == 0 && !out.empty() && out.back().kind != Tok::newline) out.push_back({Tok::newline, "", line_});
        ++line_;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
        pos_ += 2;
        ++line_;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t b = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          ++pos_;
        out.push_back({Tok::ident, std::string(src_.substr(b, pos_ - b)), line_});
      } else if (c == '\'' || c == '"') {
        out.push_back(string_literal(c));
      } else {
        Tok kind = Tok::other;
        switch (c) {
          case '(':
            kind = Tok::lparen;
            ++depth;
            break;
          case ')':
            kind = Tok::rparen;
            depth = std::max(0, depth - 1);
            break;
          case '[':
            kind = Tok::lbracket;
            ++depth;
            break;
          case ']':
            kind = Tok::rbracket;
            depth = std::max(0, depth - 1);
            break;
          case ',':
            kind = Tok::comma;
            break;
          case '=':
            kind = Tok::equals;
            break;
          case '.':
            kind = Tok::dot;
            break;
          default:
            break;
        }
        out.push_back({kind, std::string(1, c), line_});
        ++pos_;
      }
    }
    if (!out.empty() && out.back().kind != Tok::newline) out.push_back({Tok::newline, "", line_});
    out.push_back({Tok::end, "", line_});
    return out;
  }

 private:
  Token string_literal(char quote) {
    const int start_line = line_;
    ++pos_;
    std::string value;
    while (true) {
      if (pos_ >= src_.size())
        throw Failure{{DiagCode::parse_error, "unterminated string literal", "line " + std::to_string(start_line)}};
      char c = src_[pos_];
      if (c == quote) {
        ++pos_;
        break;
      }
      if (c == '\\' && pos_ + 1 < src_.size() &&
          (src_[pos_ + 1] == '\\' || src_[pos_ + 1] == '\'' || src_[pos_ + 1] == '"')) {
        value += src_[pos_ + 1];
        pos_ += 2;
        continue;
      }
      if (c == '\n') ++line_;
      value += c;
      ++pos_;
    }
    return {Tok::string, std::move(value), start_line};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

// Untyped argument values, narrowed per call.
struct Value;
using ValueList = std::vector<Value>;
struct StringValue {
  std::string text;
};
struct ListValue {
  ValueList items;
};
struct TupleValue {
  ValueList items;
  bool parenthesized_single = false;  // "(a)" without a trailing comma
};
struct Value {
  std::variant<Expr, StringValue, ListValue, TupleValue> v;
  int line = 0;
};

struct Argument {
  std::string keyword;
  Value value;
};

const std::set<std::string> kReserved = {"None", "True", "False", "ModelGenerator", "import",
                                         "from", "def", "class", "lambda", "return", "for", "while", "if",
                                         "else", "elif", "in", "is", "not", "and", "or", "with", "as",
                                         "global", "nonlocal", "yield", "try", "except", "raise", "del",
                                         "pass", "break", "continue", "assert", "async", "await", "finally"};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<std::string> lines)
      : toks_(std::move(tokens)), lines_(std::move(lines)) {}

  ScriptAst run() {
    ScriptAst ast;
    while (peek().kind != Tok::end) {
      if (peek().kind == Tok::newline) {
        ++pos_;
        continue;
      }
      ast.statements.push_back(statement());
    }
    return ast;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  std::string line_text(int line) const {
    if (line >= 1 && static_cast<std::size_t>(line) <= lines_.size()) return detail::trim(lines_[line - 1]);
    return {};
  }

  [[noreturn]] void fail(DiagCode code, int line, const std::string& message) const {
    std::string text = line_text(line);
    std::string msg = text.empty() ? message : "`" + text + "`: " + message;
    throw Failure{{code, msg, "line " + std::to_string(line)}};
  }

  [[noreturn]] void unexpected(const Token& t, const std::string& expected) const {
    std::string got;
    switch (t.kind) {
      case Tok::newline:
        got = "end of line";
        break;
      case Tok::end:
        got = "end of script";
        break;
      case Tok::string:
        got = "string '" + t.text + "'";
        break;
      default:
        got = "'" + t.text + "'";
    }
    fail(DiagCode::parse_error, t.line, "expected " + expected + " but found " + got);
  }

  const Token& expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) unexpected(peek(), what);
    return next();
  }

  void end_of_statement() {
    if (peek().kind != Tok::newline && peek().kind != Tok::end) unexpected(peek(), "end of line");
    if (peek().kind == Tok::newline) ++pos_;
  }

  Statement statement() {
    const Token& first = peek();
    Statement st;
    st.line = first.line;
    st.source_line = line_text(first.line);
    if (first.kind == Tok::ident && first.text == "from") {
      ++pos_;
      std::string module = dotted_name();
      const Token& imp = expect(Tok::ident, "'import'");
      if (imp.text != "import") unexpected(imp, "'import'");
      const Token& name = expect(Tok::ident, "an imported name");
      if (name.text != "ModelGenerator")
        fail(DiagCode::parse_error, name.line,
             "only ModelGenerator may be imported; '" + name.text + "' is not available");
      st.kind = StatementKind::import_header;
      st.target = module;
      end_of_statement();
      return st;
    }
    if (first.kind == Tok::ident && first.text == "import") {
      fail(DiagCode::parse_error, first.line,
           "import statements other than 'from ... import ModelGenerator' are not allowed");
    }
    if (first.kind != Tok::ident) unexpected(first, "an assignment");
    if (peek(1).kind != Tok::equals) {
      // A bare call statement: classify unknown calls before complaining about syntax.
      if (peek(1).kind == Tok::lparen || peek(1).kind == Tok::dot) {
        (void)expression();
        fail(DiagCode::parse_error, first.line, "expressions must be assigned to a variable");
      }
      unexpected(peek(1), "'='");
    }
    std::string target = next().text;
    ++pos_;  // '='
    if (kReserved.count(target) || (generator_declared_ && target == generator_))
      fail(DiagCode::parse_error, first.line, "'" + target + "' cannot be assigned");

    // gen = ModelGenerator()
    if (peek().kind == Tok::ident && peek().text == "ModelGenerator") {
      ++pos_;
      expect(Tok::lparen, "'('");
      expect(Tok::rparen, "')'");
      end_of_statement();
      if (bound_.count(target)) fail(DiagCode::parse_error, first.line, "variable '" + target + "' is assigned twice");
      generator_ = target;
      generator_declared_ = true;
      st.kind = StatementKind::generator_init;
      st.target = target;
      return st;
    }

    st.kind = StatementKind::assign;
    st.target = target;
    st.value = expression();
    end_of_statement();
    if (!bound_.insert(target).second)
      fail(DiagCode::parse_error, first.line, "variable '" + target + "' is assigned twice");
    return st;
  }

  std::string dotted_name() {
    std::string name = expect(Tok::ident, "a module name").text;
    while (peek().kind == Tok::dot) {
      ++pos_;
      name += "." + expect(Tok::ident, "a module name").text;
    }
    return name;
  }

  Expr expression() {
    const Token& t = peek();
    if (t.kind == Tok::ident && t.text == "None") {
      ++pos_;
      return Expr{ExprKind::none_literal, "", {}, {}, t.line};
    }
    if (t.kind == Tok::string)
      fail(DiagCode::parse_error, t.line, "string literals are only allowed as activity labels");
    if (t.kind != Tok::ident) unexpected(t, "a sub-model");
    if (kReserved.count(t.text) && t.text != "ModelGenerator")
      fail(DiagCode::parse_error, t.line, "'" + t.text + "' is not supported in model scripts");
    ++pos_;

    std::vector<std::string> chain{t.text};
    while (peek().kind == Tok::dot) {
      ++pos_;
      chain.push_back(expect(Tok::ident, "a name after '.'").text);
    }

    if (peek().kind != Tok::lparen) {
      if (chain.size() == 1) return Expr{ExprKind::var_ref, t.text, {}, {}, t.line};
      fail(DiagCode::parse_error, t.line, "attribute access '" + join(chain) + "' is not supported");
    }

    const bool generator_call = chain.size() == 2 && is_generator(chain[0]);
    const bool copy_call = chain.size() == 2 && !generator_call && chain[1] == "copy";
    if (!generator_call && !copy_call) {
      skip_call_arguments();
      fail(DiagCode::unknown_function, t.line,
           "unknown function '" + join(chain) +
               "'; only activity, xor, loop, partial_order and copy are available");
    }
    if (copy_call) {
      auto args = arguments();
      if (!args.empty()) fail(DiagCode::parse_error, t.line, "copy() takes no arguments");
      return Expr{ExprKind::copy_of, chain[0], {}, {}, t.line};
    }

    const std::string& fn = chain[1];
    if (fn == "activity") return activity_call(t.line);
    if (fn == "xor") return xor_call(t.line);
    if (fn == "loop") return loop_call(t.line);
    if (fn == "partial_order") return order_call(t.line);
    skip_call_arguments();
    fail(DiagCode::unknown_function, t.line,
         "unknown function '" + fn + "'; only activity, xor, loop, partial_order and copy are available");
  }

  bool is_generator(const std::string& name) const {
    return generator_declared_ ? name == generator_ : name == "gen";
  }

  static std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "." : "") + parts[i];
    return out;
  }

  void skip_call_arguments() {
    int depth = 0;
    do {
      const Token& t = next();
      if (t.kind == Tok::lparen || t.kind == Tok::lbracket) ++depth;
      if (t.kind == Tok::rparen || t.kind == Tok::rbracket) --depth;
      if (t.kind == Tok::end) break;
    } while (depth > 0);
  }

  std::vector<Argument> arguments() {
    expect(Tok::lparen, "'('");
    std::vector<Argument> args;
    bool keyword_seen = false;
    while (peek().kind != Tok::rparen) {
      Argument a;
      if (peek().kind == Tok::ident && peek(1).kind == Tok::equals) {
        a.keyword = next().text;
        ++pos_;
        keyword_seen = true;
        for (const auto& prev : args)
          if (prev.keyword == a.keyword)
            fail(DiagCode::parse_error, peek().line, "keyword argument '" + a.keyword + "' repeated");
      } else if (keyword_seen) {
        fail(DiagCode::parse_error, peek().line, "positional argument follows keyword argument");
      }
      a.value = value();
      args.push_back(std::move(a));
      if (peek().kind == Tok::comma) {
        ++pos_;
        continue;
      }
      if (peek().kind != Tok::rparen) unexpected(peek(), "',' or ')'");
    }
    ++pos_;
    return args;
  }

  Value value() {
    const Token& t = peek();
    if (t.kind == Tok::string) {
      ++pos_;
      return Value{StringValue{t.text}, t.line};
    }
    if (t.kind == Tok::lbracket) {
      ++pos_;
      ListValue list;
      while (peek().kind != Tok::rbracket) {
        list.items.push_back(value());
        if (peek().kind == Tok::comma) {
          ++pos_;
          continue;
        }
        if (peek().kind != Tok::rbracket) unexpected(peek(), "',' or ']'");
      }
      ++pos_;
      return Value{std::move(list), t.line};
    }
    if (t.kind == Tok::lparen) {
      ++pos_;
      TupleValue tuple;
      bool comma = false;
      while (peek().kind != Tok::rparen) {
        tuple.items.push_back(value());
        if (peek().kind == Tok::comma) {
          ++pos_;
          comma = true;
          continue;
        }
        if (peek().kind != Tok::rparen) unexpected(peek(), "',' or ')'");
      }
      ++pos_;
      tuple.parenthesized_single = !comma && tuple.items.size() == 1;
      return Value{std::move(tuple), t.line};
    }
    if (t.kind == Tok::other && t.text == "*")
      fail(DiagCode::parse_error, t.line, "argument unpacking is not supported");
    return Value{expression(), t.line};
  }

  Expr as_expr(Value&& v, const std::string& context) {
    if (auto* e = std::get_if<Expr>(&v.v)) return std::move(*e);
    if (auto* tup = std::get_if<TupleValue>(&v.v); tup && tup->parenthesized_single)
      return as_expr(std::move(tup->items.front()), context);
    fail(DiagCode::parse_error, v.line, context + " must be a sub-model");
  }

  Expr activity_call(int line) {
    auto args = arguments();
    if (args.size() != 1 || (!args[0].keyword.empty() && args[0].keyword != "label"))
      fail(DiagCode::parse_error, line, "activity(label) takes exactly one string argument");
    auto* s = std::get_if<StringValue>(&args[0].value.v);
    if (!s) fail(DiagCode::parse_error, line, "activity(label) takes exactly one string argument");
    return Expr{ExprKind::activity_call, s->text, {}, {}, line};
  }

  Expr xor_call(int line) {
    auto args = arguments();
    Expr e{ExprKind::xor_call, "", {}, {}, line};
    for (auto& a : args) {
      if (!a.keyword.empty()) fail(DiagCode::parse_error, line, "xor(*args) takes positional sub-models only");
      e.args.push_back(as_expr(std::move(a.value), "xor argument"));
    }
    return e;
  }

  Expr loop_call(int line) {
    auto args = arguments();
    if (args.size() != 2)
      fail(DiagCode::parse_error, line, "loop(do, redo) takes exactly 2 arguments");
    Expr e{ExprKind::loop_call, "", {}, {}, line};
    std::optional<Expr> do_part, redo_part;
    for (std::size_t i = 0; i < 2; ++i) {
      auto& a = args[i];
      const std::string role = a.keyword.empty() ? (i == 0 ? "do" : "redo") : a.keyword;
      if (role != "do" && role != "redo")
        fail(DiagCode::parse_error, line, "loop() has no argument named '" + a.keyword + "'");
      auto& slot = role == "do" ? do_part : redo_part;
      if (slot) fail(DiagCode::parse_error, line, "loop() argument '" + role + "' given twice");
      slot = as_expr(std::move(a.value), "loop " + role + " part");
    }
    e.args.push_back(std::move(*do_part));
    e.args.push_back(std::move(*redo_part));
    return e;
  }

  Expr order_call(int line) {
    auto args = arguments();
    if (args.size() != 1 || (!args[0].keyword.empty() && args[0].keyword != "dependencies"))
      fail(DiagCode::parse_error, line, "partial_order(dependencies) takes exactly one list argument");
    auto* list = std::get_if<ListValue>(&args[0].value.v);
    if (!list) fail(DiagCode::parse_error, line, "dependencies must be a list of tuples");
    Expr e{ExprKind::order_call, "", {}, {}, line};
    for (auto& item : list->items) {
      std::vector<Expr> tuple;
      if (auto* t = std::get_if<TupleValue>(&item.v)) {
        if (t->items.empty()) fail(DiagCode::parse_error, item.line, "empty tuple in dependencies");
        for (auto& x : t->items) tuple.push_back(as_expr(std::move(x), "dependency element"));
      } else {
        tuple.push_back(as_expr(std::move(item), "dependency element"));
      }
      e.tuples.push_back(std::move(tuple));
    }
    return e;
  }

  std::vector<Token> toks_;
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
  std::string generator_ = "gen";
  bool generator_declared_ = false;
  std::set<std::string> bound_;
};

}  // namespace

ExtractResult extract_code(std::string_view response) {
  ExtractResult result;
  std::optional<std::string_view> body;
  std::size_t pos = 0;
  while (pos < response.size() && !body) {
    auto eol = response.find('\n', pos);
    std::string line = detail::trim(response.substr(pos, eol == std::string_view::npos ? eol : eol - pos));
    std::size_t next_line = eol == std::string_view::npos ? response.size() : eol + 1;
    if (line.rfind("```", 0) == 0) {
      std::string info = detail::trim(std::string_view(line).substr(3));
      auto close = response.find("```", next_line);
      if (info == "python" || info.empty()) {
        body = response.substr(next_line, close == std::string_view::npos ? close : close - next_line);
        break;
      }
      // Other info strings (```json, ```text, ...) are not code; skip the block.
      if (close == std::string_view::npos) break;
      auto close_eol = response.find('\n', close);
      next_line = close_eol == std::string_view::npos ? response.size() : close_eol + 1;
    }
    pos = next_line;
  }
  result.script.source = detail::trim(body ? *body : response);
  if (result.script.source.empty())
    result.error = Diagnostic{DiagCode::empty_response, "the response did not contain any code", ""};
  return result;
}

ParseResult parse(const Script& script) {
  ParseResult result;
  try {
    Lexer lexer(script.source);
    Parser parser(lexer.run(), detail::split_lines(script.source));
    result.ast = parser.run();
  } catch (const Failure& f) {
    result.report.add(f.diagnostic);
  }
  return result;
}

}  // namespace powlgen::dsl

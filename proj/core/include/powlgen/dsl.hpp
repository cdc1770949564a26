#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "powlgen/model.hpp"

namespace powlgen::dsl {

/// Raw construction script text as emitted by the LLM.
struct Script {
  std::string source;
};

enum class ExprKind {
  activity_call,  // gen.activity('label')
  xor_call,       // gen.xor(e1, e2, ...)
  loop_call,      // gen.loop(do=e1, redo=e2)
  order_call,     // gen.partial_order(dependencies=[(v1, v2, ...), ...])
  var_ref,
  copy_of,        // v.copy()
  none_literal,
};

struct Expr {
  ExprKind kind = ExprKind::none_literal;
  std::string text;                       // label or variable name
  std::vector<Expr> args;                 // xor branches; loop {do, redo}
  std::vector<std::vector<Expr>> tuples;  // partial_order dependencies
  int line = 0;
};

enum class StatementKind { import_header, generator_init, assign };

struct Statement {
  StatementKind kind = StatementKind::assign;
  std::string target;  // assign target or generator variable
  Expr value;
  int line = 0;
  std::string source_line;
};

struct ScriptAst {
  std::vector<Statement> statements;
};

struct ExtractResult {
  Script script;
  std::optional<Diagnostic> error;  // EMPTY_RESPONSE
};

/// Contents of the first ```python (or bare ```) fenced block; the whole
/// response trimmed when there is no such fence.
ExtractResult extract_code(std::string_view llm_response);

struct ParseResult {
  std::optional<ScriptAst> ast;
  ValidationReport report;  // PARSE_ERROR / UNKNOWN_FUNCTION, quoting the offending line
};

ParseResult parse(const Script& script);

struct EvalResult {
  Model model;  // null when the report has critical diagnostics
  ValidationReport report;
};

/// Interprets the statement list. The model bound to `final_model` is
/// order-closed and validated. SUBMODEL_REUSE diagnostics leave the model
/// in place so that the caller can decide to auto-fix it.
EvalResult evaluate(const ScriptAst& ast);

/// parse + evaluate; parse diagnostics are returned as-is when parsing fails.
EvalResult compile(const Script& script);

struct RenderOptions {
  bool include_header = true;
};

/// Canonical script: one assignment per node, `final_model` last.
Script render(const Model& model, const RenderOptions& options = {});

/// Reads a script file and compiles it. Throws std::runtime_error on I/O failure.
EvalResult compile_file(const std::string& path);

}  // namespace powlgen::dsl

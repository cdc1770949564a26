#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace powlgen {

enum class Severity { critical, adjustable, warning };

/// Stable diagnostic identifiers. Every code maps to exactly one severity.
enum class DiagCode {
  irreflexivity_violation,
  order_cycle,
  xor_arity,
  submodel_reuse,
  undefined_variable,
  missing_final_model,
  parse_error,
  unknown_function,
  unused_variable,
  empty_response,
  empty_partial_order,
  invalid_label,
  transport_error,
};

Severity severity_of(DiagCode code);
std::string_view code_name(DiagCode code);
std::string_view severity_name(Severity s);
/// Inverse of code_name; throws std::invalid_argument on unknown names.
DiagCode code_from_name(std::string_view name);

struct Diagnostic {
  DiagCode code;
  std::string message;
  std::string path;  // tree path ("root/2/do") or source location ("line 7")

  Severity severity() const { return severity_of(code); }
};

/// Renders "[CODE] message (path)", the form fed back to the LLM.
std::string to_string(const Diagnostic& d);

class ValidationReport {
 public:
  ValidationReport() = default;
  explicit ValidationReport(std::vector<Diagnostic> diagnostics) : diagnostics_(std::move(diagnostics)) {}

  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  void add(Diagnostic d) { diagnostics_.push_back(std::move(d)); }
  void append(const ValidationReport& other);

  bool is_valid() const { return !has(Severity::critical); }
  bool has(Severity s) const;
  bool has(DiagCode c) const;
  std::size_t count(DiagCode c) const;

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Raised by operations whose contract is to fail with a diagnostic code
/// (close_order on a cycle, construction of ill-formed nodes, ...).
class PowlError : public std::runtime_error {
 public:
  PowlError(DiagCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  DiagCode code() const { return code_; }

 private:
  DiagCode code_;
};

}  // namespace powlgen

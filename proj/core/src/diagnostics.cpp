#include "powlgen/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace powlgen {

namespace {

struct CodeInfo {
  DiagCode code;
  std::string_view name;
  Severity severity;
};

constexpr std::array<CodeInfo, 13> kCodes{{
    {DiagCode::irreflexivity_violation, "IRREFLEXIVITY_VIOLATION", Severity::critical},
    {DiagCode::order_cycle, "ORDER_CYCLE", Severity::critical},
    {DiagCode::xor_arity, "XOR_ARITY", Severity::critical},
    {DiagCode::submodel_reuse, "SUBMODEL_REUSE", Severity::adjustable},
    {DiagCode::undefined_variable, "UNDEFINED_VARIABLE", Severity::critical},
    {DiagCode::missing_final_model, "MISSING_FINAL_MODEL", Severity::critical},
    {DiagCode::parse_error, "PARSE_ERROR", Severity::critical},
    {DiagCode::unknown_function, "UNKNOWN_FUNCTION", Severity::critical},
    {DiagCode::unused_variable, "UNUSED_VARIABLE", Severity::warning},
    {DiagCode::empty_response, "EMPTY_RESPONSE", Severity::critical},
    {DiagCode::empty_partial_order, "EMPTY_PARTIAL_ORDER", Severity::critical},
    {DiagCode::invalid_label, "INVALID_LABEL", Severity::critical},
    {DiagCode::transport_error, "TRANSPORT_ERROR", Severity::critical},
}};

const CodeInfo& info(DiagCode code) {
  return kCodes[static_cast<std::size_t>(code)];
}

}  // namespace

Severity severity_of(DiagCode code) { return info(code).severity; }

std::string_view code_name(DiagCode code) { return info(code).name; }

std::string_view severity_name(Severity s) {
  switch (s) {
    case Severity::critical:
      return "critical";
    case Severity::adjustable:
      return "adjustable";
    case Severity::warning:
      return "warning";
  }
  return "unknown";
}

DiagCode code_from_name(std::string_view name) {
  auto it = std::find_if(kCodes.begin(), kCodes.end(),
                         [&](const CodeInfo& c) { return c.name == name; });
  if (it == kCodes.end()) throw std::invalid_argument("unknown diagnostic code: " + std::string(name));
  return it->code;
}

std::string to_string(const Diagnostic& d) {
  std::string out = "[" + std::string(code_name(d.code)) + "] " + d.message;
  if (!d.path.empty()) out += " (" + d.path + ")";
  return out;
}

void ValidationReport::append(const ValidationReport& other) {
  diagnostics_.insert(diagnostics_.end(), other.diagnostics_.begin(), other.diagnostics_.end());
}

bool ValidationReport::has(Severity s) const {
  return std::any_of(diagnostics_.begin(), diagnostics_.end(),
                     [&](const Diagnostic& d) { return d.severity() == s; });
}

bool ValidationReport::has(DiagCode c) const { return count(c) > 0; }

std::size_t ValidationReport::count(DiagCode c) const {
  return static_cast<std::size_t>(std::count_if(
      diagnostics_.begin(), diagnostics_.end(), [&](const Diagnostic& d) { return d.code == c; }));
}

}  // namespace powlgen

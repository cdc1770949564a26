#pragma once

#include <nlohmann/json.hpp>

#include "powlgen/model.hpp"

namespace powlgen {

/// Tree encoding used by the service API:
///   {"type":"activity","label":"A"}
///   {"type":"silent"}
///   {"type":"xor","children":[...]}
///   {"type":"loop","do":{...},"redo":{...}}
///   {"type":"partial_order","nodes":[...],"edges":[[0,1],...]}
nlohmann::json model_to_json(const Model& model);

/// Throws PowlError(PARSE_ERROR) on malformed input; construction errors
/// (xor arity, empty order) propagate with their own codes.
Model model_from_json(const nlohmann::json& j);

nlohmann::json diagnostic_to_json(const Diagnostic& d);
Diagnostic diagnostic_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const ValidationReport& r);

}  // namespace powlgen

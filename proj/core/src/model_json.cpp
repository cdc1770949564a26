#include "powlgen/model_json.hpp"

namespace powlgen {

using nlohmann::json;

json model_to_json(const Model& m) {
  json j;
  j["type"] = std::string(kind_name(m->kind()));
  switch (m->kind()) {
    case NodeKind::activity:
      j["label"] = m->label();
      break;
    case NodeKind::silent:
      break;
    case NodeKind::xor_choice: {
      json kids = json::array();
      for (const auto& c : m->children()) kids.push_back(model_to_json(c));
      j["children"] = std::move(kids);
      break;
    }
    case NodeKind::loop:
      j["do"] = model_to_json(m->do_part());
      j["redo"] = model_to_json(m->redo_part());
      break;
    case NodeKind::partial_order: {
      json kids = json::array();
      for (const auto& c : m->children()) kids.push_back(model_to_json(c));
      json edges = json::array();
      for (auto [a, b] : m->edges()) edges.push_back({a, b});
      j["nodes"] = std::move(kids);
      j["edges"] = std::move(edges);
      break;
    }
  }
  return j;
}

Model model_from_json(const json& j) {
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "activity") return activity(j.at("label").get<std::string>());
    if (type == "silent") return silent();
    if (type == "xor") {
      std::vector<Model> kids;
      for (const auto& c : j.at("children")) kids.push_back(model_from_json(c));
      return xor_of(std::move(kids));
    }
    if (type == "loop") return loop(model_from_json(j.at("do")), model_from_json(j.at("redo")));
    if (type == "partial_order") {
      std::vector<Model> kids;
      for (const auto& c : j.at("nodes")) kids.push_back(model_from_json(c));
      EdgeSet edges;
      for (const auto& e : j.value("edges", json::array()))
        edges.emplace(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
      return partial_order(std::move(kids), std::move(edges));
    }
    throw PowlError(DiagCode::parse_error, "unknown model node type '" + type + "'");
  } catch (const json::exception& e) {
    throw PowlError(DiagCode::parse_error, std::string("malformed model JSON: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw PowlError(DiagCode::parse_error, std::string("malformed model JSON: ") + e.what());
  }
}

json diagnostic_to_json(const Diagnostic& d) {
  return {{"code", std::string(code_name(d.code))},
          {"severity", std::string(severity_name(d.severity()))},
          {"message", d.message},
          {"path", d.path}};
}

Diagnostic diagnostic_from_json(const json& j) {
  return {code_from_name(j.at("code").get<std::string>()), j.at("message").get<std::string>(),
          j.value("path", std::string{})};
}

json report_to_json(const ValidationReport& r) {
  json diags = json::array();
  for (const auto& d : r.diagnostics()) diags.push_back(diagnostic_to_json(d));
  return {{"is_valid", r.is_valid()}, {"diagnostics", std::move(diags)}};
}

}  // namespace powlgen

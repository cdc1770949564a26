#include "powlgen/bench/records.hpp"

#include <sstream>

#include "util.hpp"

namespace powlgen::bench {

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::baseline:
      return "baseline";
    case Strategy::self_eval_general:
      return "self_eval_general";
    case Strategy::self_eval_conformance:
      return "self_eval_conformance";
    case Strategy::input_opt:
      return "input_opt";
    case Strategy::output_opt:
      return "output_opt";
  }
  return "baseline";
}

std::vector<Strategy> all_strategies() {
  return {Strategy::baseline, Strategy::self_eval_general, Strategy::self_eval_conformance, Strategy::input_opt,
          Strategy::output_opt};
}

Strategy strategy_from_name(std::string_view name) {
  for (auto s : all_strategies())
    if (strategy_name(s) == name) return s;
  throw std::invalid_argument("unknown strategy: " + std::string(name));
}

std::vector<Strategy> parse_strategies(const std::string& list) {
  std::vector<Strategy> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = powlgen::detail::trim(item);
    if (item.empty()) continue;
    if (item == "all") return all_strategies();
    auto s = strategy_from_name(item);
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  if (out.empty()) throw std::invalid_argument("no strategy selected");
  return out;
}

nlohmann::json record_to_json(const RunRecord& r) {
  auto cand = nlohmann::json::array();
  for (const auto& q : r.candidate_quality) cand.push_back(opt(q));
  return {{"fixture", r.fixture},
          {"provider", r.provider},
          {"strategy", strategy_name(r.strategy)},
          {"band", r.band},
          {"iterations", r.iterations},
          {"status", llm::status_name(r.status)},
          {"auto_fixed", r.auto_fixed},
          {"total_seconds", r.total_seconds},
          {"iteration_seconds", r.iteration_seconds},
          {"fitness", opt(r.fitness)},
          {"precision", opt(r.precision)},
          {"quality", opt(r.quality)},
          {"error", r.error},
          {"candidate_quality", cand},
          {"llm_scores", r.llm_scores},
          {"selected", r.selected ? nlohmann::json(*r.selected) : nlohmann::json()},
          {"quality_before", opt(r.quality_before)},
          {"unchanged", r.unchanged},
          {"sends", r.sends}};
}

RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.fixture = j.at("fixture");
  r.provider = j.at("provider");
  r.strategy = strategy_from_name(j.at("strategy").get<std::string>());
  r.band = j.value("band", std::string("long"));
  r.iterations = j.at("iterations");
  r.status = llm::status_from_name(j.at("status").get<std::string>());
  r.auto_fixed = j.at("auto_fixed");
  r.total_seconds = j.at("total_seconds");
  r.iteration_seconds = j.at("iteration_seconds").get<std::vector<double>>();
  r.fitness = opt_from(j, "fitness");
  r.precision = opt_from(j, "precision");
  r.quality = opt_from(j, "quality");
  r.error = j.value("error", std::string());
  for (const auto& q : j.value("candidate_quality", nlohmann::json::array()))
    r.candidate_quality.push_back(q.is_null() ? std::nullopt : std::optional<double>(q.get<double>()));
  r.llm_scores = j.value("llm_scores", std::vector<double>{});
  if (j.contains("selected") && !j.at("selected").is_null()) r.selected = j.at("selected").get<int>();
  r.quality_before = opt_from(j, "quality_before");
  r.unchanged = j.value("unchanged", false);
  r.sends = j.value("sends", 0);
  return r;
}

std::vector<RunRecord> load_records(const std::string& path) {
  std::vector<RunRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (powlgen::detail::trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;  // partial line from an interrupted run
    out.push_back(record_from_json(j));
  }
  return out;
}

RecordSink::RecordSink(const std::string& path) {
  bool needs_newline = false;
  if (std::ifstream probe{path, std::ios::binary | std::ios::ate}; probe && probe.tellg() > 0) {
    probe.seekg(-1, std::ios::end);
    needs_newline = probe.get() != '\n';
  }
  out_.open(path, std::ios::app);
  if (!out_) throw std::runtime_error("cannot open " + path);
  if (needs_newline) out_ << '\n';
}

void RecordSink::append(const RunRecord& r) {
  std::lock_guard lock(mu_);
  out_ << record_to_json(r).dump() << '\n';
  out_.flush();
}

}  // namespace powlgen::bench

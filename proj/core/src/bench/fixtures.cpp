#include "powlgen/bench/fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "powlgen/dsl.hpp"
#include "util.hpp"

namespace fs = std::filesystem;

namespace powlgen::bench {

namespace {

std::optional<std::string> read_optional(const fs::path& p) {
  if (!fs::exists(p)) return std::nullopt;
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return powlgen::detail::trim(ss.str());
}

}  // namespace

std::optional<std::string> Fixture::description_for(const std::string& band) const {
  if (band == "long") return description;
  if (band == "medium") return description_medium;
  if (band == "short") return description_short;
  return std::nullopt;
}

Fixture load_fixture(const std::string& dir, const SimulationConfig& sim) {
  Fixture f;
  f.id = fs::path(dir).filename().string();
  if (f.id.empty()) f.id = fs::path(dir).parent_path().filename().string();

  auto description = read_optional(fs::path(dir) / "description.txt");
  if (!description) throw FixtureError(f.id, "missing description.txt");
  if (description->empty()) throw FixtureError(f.id, "description.txt is empty");
  f.description = *description;
  f.description_medium = read_optional(fs::path(dir) / "description.medium.txt");
  f.description_short = read_optional(fs::path(dir) / "description.short.txt");

  auto script = read_optional(fs::path(dir) / "ground_truth.powl");
  if (!script) throw FixtureError(f.id, "missing ground_truth.powl");
  f.ground_truth_script = *script + "\n";
  auto compiled = dsl::compile(dsl::Script{f.ground_truth_script});
  for (const auto& d : compiled.report.diagnostics())
    if (d.severity() != Severity::warning)
      throw FixtureError(f.id, "invalid ground truth: " + to_string(d), d.code);
  if (!compiled.model) throw FixtureError(f.id, "ground truth produced no model");
  f.ground_truth = compiled.model;
  f.labels = activity_labels(f.ground_truth);
  f.has_loop = contains_loop(f.ground_truth);
  try {
    f.log = simulate_log(f.ground_truth, sim);
  } catch (const SimulationError& e) {
    throw FixtureError(f.id, e.what());
  }
  return f;
}

std::vector<Fixture> load_fixtures(const std::string& dir, const SimulationConfig& sim) {
  if (!fs::is_directory(dir)) throw FixtureError(dir, "not a directory");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<Fixture> out;
  for (const auto& d : dirs) out.push_back(load_fixture(d.string(), sim));
  return out;
}

}  // namespace powlgen::bench

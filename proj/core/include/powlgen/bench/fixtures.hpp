#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "powlgen/diagnostics.hpp"
#include "powlgen/event_log.hpp"
#include "powlgen/model.hpp"
#include "powlgen/semantics.hpp"

namespace powlgen::bench {

struct Fixture {
  std::string id;
  std::string description;
  std::optional<std::string> description_medium;
  std::optional<std::string> description_short;
  std::string ground_truth_script;
  Model ground_truth;
  std::vector<std::string> labels;  // distinct activity labels, sorted
  EventLog log;                     // one case per variant
  bool has_loop = false;

  /// "long", "medium" or "short"; nullopt when the variant is not shipped.
  std::optional<std::string> description_for(const std::string& band) const;
};

class FixtureError : public std::runtime_error {
 public:
  FixtureError(std::string fixture, const std::string& what, std::optional<DiagCode> code = std::nullopt)
      : std::runtime_error("fixture '" + fixture + "': " + what), fixture_(std::move(fixture)), code_(code) {}
  const std::string& fixture() const { return fixture_; }
  std::optional<DiagCode> code() const { return code_; }

 private:
  std::string fixture_;
  std::optional<DiagCode> code_;
};

/// Loads one fixture directory (description.txt, ground_truth.powl and the
/// optional description.medium.txt / description.short.txt).
Fixture load_fixture(const std::string& dir, const SimulationConfig& sim = {});

/// Every subdirectory of `dir`, sorted by id. Throws FixtureError.
std::vector<Fixture> load_fixtures(const std::string& dir, const SimulationConfig& sim = {});

}  // namespace powlgen::bench

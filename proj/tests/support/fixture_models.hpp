#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "powlgen/dsl.hpp"

namespace fixtures {

struct NamedModel {
  std::string name;
  powlgen::Model model;
};

/// Ground-truth models of every fixture directory under `root`.
inline std::vector<NamedModel> ground_truths(const std::string& root) {
  std::vector<NamedModel> out;
  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(root))
    if (e.is_directory() && std::filesystem::exists(e.path() / "ground_truth.powl")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    auto r = powlgen::dsl::compile_file((d / "ground_truth.powl").string());
    out.push_back({d.filename().string(), r.model});
  }
  return out;
}

}  // namespace fixtures

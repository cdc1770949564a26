#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "powlgen/bench/reports.hpp"
#include "powlgen/bench/runner.hpp"

using namespace powlgen;
namespace fs = std::filesystem;

namespace {

std::map<std::string, double> read_ground_truth(const fs::path& p) {
  std::map<std::string, double> out;
  std::ifstream in(p);
  if (!in) return out;
  auto j = nlohmann::json::parse(in);
  for (auto& [k, v] : j.items()) out[k] = v.get<double>();
  return out;
}

void report(const std::vector<bench::RunRecord>& records, const fs::path& in_dir, const fs::path& out_dir) {
  auto gt = read_ground_truth(in_dir / "ground_truth.json");
  auto tables = bench::emit_reports(records, gt.empty() ? std::nullopt : std::optional(gt));
  bench::write_reports(tables, out_dir.string());
  for (const auto& t : tables) std::cout << t.to_text() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness: fixtures x providers x strategies"};
  app.require_subcommand(1);

  std::string fixtures_dir, providers_file, strategies = "baseline", out_dir, in_dir, report_dir;
  bench::MatrixConfig cfg;
  bool no_labels = false, quiet = false;
  int loop_cap = 2;

  auto* run = app.add_subcommand("run", "Run the matrix and write records and reports");
  run->add_option("--fixtures", fixtures_dir)->required()->check(CLI::ExistingDirectory);
  run->add_option("--providers", providers_file)->required()->check(CLI::ExistingFile);
  run->add_option("--strategies", strategies, "Comma-separated list or 'all'")->capture_default_str();
  run->add_option("--out", out_dir)->required();
  run->add_option("--seed", cfg.seed)->capture_default_str();
  run->add_option("--candidates", cfg.candidates, "Candidates for self-evaluation")->capture_default_str();
  run->add_option("--output-retries", cfg.output_retry_limit)->capture_default_str();
  run->add_option("--adjustable-threshold", cfg.generation.adjustable_iteration_threshold)->capture_default_str();
  run->add_option("--iteration-limit", cfg.generation.total_iteration_limit)->capture_default_str();
  run->add_option("--loop-cap", loop_cap, "Loop cap for the ground-truth logs")->capture_default_str();
  run->add_flag("--no-label-constraint", no_labels);
  run->add_flag("-q,--quiet", quiet);

  auto* rep = app.add_subcommand("report", "Recompute the tables from a run directory");
  rep->add_option("--in", in_dir)->required()->check(CLI::ExistingDirectory);
  rep->add_option("--out", report_dir, "Output directory (default: <in>/reports)");

  auto* fix = app.add_subcommand("fixtures", "Load fixtures and print their statistics");
  fix->add_option("--fixtures", fixtures_dir)->required()->check(CLI::ExistingDirectory);
  fix->add_option("--loop-cap", loop_cap)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fix) {
      auto fixtures = bench::load_fixtures(fixtures_dir, {loop_cap, 10000});
      auto gt = bench::ground_truth_quality(fixtures);
      std::printf("%-22s %10s %9s %5s %8s\n", "fixture", "activities", "variants", "loop", "quality");
      for (const auto& f : fixtures)
        std::printf("%-22s %10zu %9zu %5s %8.4f\n", f.id.c_str(), f.labels.size(), f.log.cases.size(),
                    f.has_loop ? "yes" : "no", gt[f.id]);
      return 0;
    }
    if (*rep) {
      auto records = bench::load_records((fs::path(in_dir) / "records.jsonl").string());
      if (records.empty()) throw std::runtime_error("no records in " + in_dir);
      report(records, in_dir, report_dir.empty() ? fs::path(in_dir) / "reports" : fs::path(report_dir));
      return 0;
    }

    auto fixtures = bench::load_fixtures(fixtures_dir, {loop_cap, 10000});
    auto providers = llm::load_provider_configs(providers_file);
    const auto selected = bench::parse_strategies(strategies);
    fs::create_directories(out_dir);
    {
      nlohmann::json gt = bench::ground_truth_quality(fixtures);
      std::ofstream(fs::path(out_dir) / "ground_truth.json") << gt.dump(2) << "\n";
    }
    for (const auto& f : fixtures)
      if (!quiet) std::cerr << "fixture " << f.id << ": " << f.labels.size() << " activities, " << f.log.cases.size()
                            << " variants\n";
    cfg.label_constraint = !no_labels;
    cfg.records_path = (fs::path(out_dir) / "records.jsonl").string();
    std::mutex mu;
    cfg.on_record = [&](const bench::RunRecord& r) {
      if (quiet) return;
      std::lock_guard lock(mu);
      std::cerr << r.provider << " " << bench::strategy_name(r.strategy) << " " << r.fixture
                << (r.band != "long" ? " [" + r.band + "]" : "") << ": " << llm::status_name(r.status)
                << ", iterations " << r.iterations;
      if (r.quality) std::cerr << ", quality " << *r.quality;
      if (!r.error.empty()) std::cerr << " (" << r.error << ")";
      std::cerr << "\n";
    };
    auto records = bench::run_matrix(fixtures, providers, selected, cfg);
    report(records, out_dir, fs::path(out_dir) / "reports");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

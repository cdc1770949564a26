#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "powlgen/bench/reports.hpp"
#include "powlgen/bench/runner.hpp"
#include "support/scripts.hpp"

using namespace powlgen;
using namespace powlgen::bench;
namespace fs = std::filesystem;

namespace {

const std::string kSelfEvalDir = std::string(POWLGEN_TEST_DATA_DIR) + "/selfeval";

struct TempDir {
  fs::path path;
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path = fs::temp_directory_path() / ("powlgen_bench_" + std::to_string(rng()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& leaf = "") const { return (leaf.empty() ? path : path / leaf).string(); }
};

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

llm::ProviderConfig mock(const std::string& name, std::vector<std::string> script, int concurrency = 1) {
  llm::ProviderConfig c;
  c.name = name;
  c.kind = llm::ProviderKind::mock;
  c.max_concurrency = concurrency;
  c.script = std::move(script);
  return c;
}

const std::string kOracle = "```python\n{{ground_truth}}```";

const std::string kHeader = "gen = ModelGenerator()\na = gen.activity('A')\nb = gen.activity('B')\nc = gen.activity('C')\n";
const std::string kSeq = kHeader + "final_model = gen.partial_order(dependencies=[(a, b, c)])";
const std::string kSeqSkip = kHeader + "sc = gen.xor(c, None)\nfinal_model = gen.partial_order(dependencies=[(a, b, sc)])";
const std::string kMix = kHeader + "final_model = gen.partial_order(dependencies=[(a, b), (a, c)])";
const std::string kPar = kHeader + "final_model = gen.partial_order(dependencies=[(a,), (b,), (c,)])";

Fixture fixture(const std::string& id) { return load_fixture(kSelfEvalDir + "/" + id); }

RunRecord run_one(const Fixture& f, const llm::ProviderConfig& p, Strategy s, MatrixConfig cfg = {}) {
  auto rs = run_matrix({f}, {p}, {s}, cfg);
  EXPECT_EQ(rs.size(), 1u);
  return rs.at(0);
}

RunRecord baseline(std::string provider, int iterations, llm::SessionStatus status, std::optional<double> q,
                   double seconds, bool autofix = false) {
  RunRecord r;
  r.fixture = "f" + std::to_string(iterations);
  r.provider = std::move(provider);
  r.iterations = iterations;
  r.status = status;
  r.quality = q;
  r.total_seconds = seconds;
  r.auto_fixed = autofix;
  return r;
}

}  // namespace

TEST(Fixtures, ShippedSetLoads) {
  auto fs = load_fixtures(POWLGEN_FIXTURES_DIR);
  ASSERT_EQ(fs.size(), 9u);
  EXPECT_TRUE(std::is_sorted(fs.begin(), fs.end(), [](const Fixture& a, const Fixture& b) { return a.id < b.id; }));
  for (const auto& f : fs) {
    EXPECT_FALSE(f.description.empty()) << f.id;
    EXPECT_FALSE(f.log.cases.empty()) << f.id;
  }
  auto bicycle = std::find_if(fs.begin(), fs.end(), [](const Fixture& f) { return f.id == "bicycle"; });
  ASSERT_NE(bicycle, fs.end());
  EXPECT_EQ(bicycle->labels.size(), 12u);
  EXPECT_TRUE(bicycle->has_loop);
  EXPECT_TRUE(bicycle->description_for("medium"));
}

TEST(Fixtures, GroundTruthIsFullyFitting) {
  for (const auto& f : load_fixtures(POWLGEN_FIXTURES_DIR)) {
    auto r = conformance::evaluate_model(f.ground_truth, f.log);
    EXPECT_DOUBLE_EQ(r.fitness, 1.0) << f.id;
    if (!f.has_loop) EXPECT_DOUBLE_EQ(r.precision, 1.0) << f.id;
  }
}

TEST(Fixtures, MissingDescriptionNamesFixture) {
  TempDir d;
  write(d.path / "broken" / "ground_truth.powl", kSeq);
  try {
    load_fixtures(d.str());
    FAIL();
  } catch (const FixtureError& e) {
    EXPECT_EQ(e.fixture(), "broken");
    EXPECT_NE(std::string(e.what()).find("description.txt"), std::string::npos);
  }
}

TEST(Fixtures, CyclicGroundTruthReportsOrderCycle) {
  TempDir d;
  write(d.path / "cyc" / "description.txt", "A, B and C wait for each other.");
  write(d.path / "cyc" / "ground_truth.powl", kHeader + "final_model = gen.partial_order(dependencies=[(a, b), (b, c), (c, a)])");
  try {
    load_fixture(d.str("cyc"));
    FAIL();
  } catch (const FixtureError& e) {
    EXPECT_EQ(e.fixture(), "cyc");
    ASSERT_TRUE(e.code());
    EXPECT_EQ(*e.code(), DiagCode::order_cycle);
  }
}

TEST(Fixtures, BandsAreOptional) {
  auto f = fixture("seq");
  EXPECT_EQ(f.description_for("long"), f.description);
  EXPECT_FALSE(f.description_for("medium"));
  EXPECT_FALSE(f.description_for("short"));
  EXPECT_FALSE(f.description_for("tiny"));
}

TEST(Records, StrategyNames) {
  EXPECT_EQ(parse_strategies("all"), all_strategies());
  EXPECT_EQ(parse_strategies("baseline, output_opt"), (std::vector{Strategy::baseline, Strategy::output_opt}));
  EXPECT_THROW(parse_strategies("baseline,bogus"), std::invalid_argument);
  for (auto s : all_strategies()) EXPECT_EQ(strategy_from_name(strategy_name(s)), s);
}

TEST(Records, JsonRoundTrip) {
  RunRecord r;
  r.fixture = "seq";
  r.provider = "p";
  r.strategy = Strategy::self_eval_conformance;
  r.iterations = 3;
  r.status = llm::SessionStatus::succeeded_with_autofix;
  r.auto_fixed = true;
  r.total_seconds = 1.5;
  r.iteration_seconds = {0.5, 0.5, 0.5};
  r.fitness = 0.9;
  r.precision = 0.8;
  r.quality = 0.85;
  r.candidate_quality = {0.5, std::nullopt, 1.0};
  r.llm_scores = {0.1, -1, 0.7};
  r.selected = 2;
  auto back = record_from_json(record_to_json(r));
  EXPECT_EQ(record_to_json(back), record_to_json(r));
  EXPECT_EQ(back.key(), r.key());
  EXPECT_FALSE(back.candidate_quality[1]);
}

TEST(Records, TruncatedLineIsSkippedAndRepaired) {
  TempDir d;
  RunRecord a;
  a.fixture = "x";
  a.provider = "p";
  {
    RecordSink sink(d.str("r.jsonl"));
    sink.append(a);
  }
  { std::ofstream(d.str("r.jsonl"), std::ios::app) << R"({"fixture":"y","prov)"; }
  EXPECT_EQ(load_records(d.str("r.jsonl")).size(), 1u);
  RunRecord b = a;
  b.fixture = "z";
  {
    RecordSink sink(d.str("r.jsonl"));
    sink.append(b);
  }
  auto rs = load_records(d.str("r.jsonl"));
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[1].fixture, "z");
}

TEST(Runner, OracleBaselineMatchesGroundTruthQuality) {
  const std::vector<Fixture> fs{fixture("mix"), fixture("seqskip")};
  auto rs = run_matrix(fs, {mock("oracle", {kOracle})}, {Strategy::baseline}, {});
  auto gt = ground_truth_quality(fs);
  ASSERT_EQ(rs.size(), 2u);
  for (const auto& r : rs) {
    EXPECT_EQ(r.iterations, 1);
    EXPECT_EQ(r.status, llm::SessionStatus::succeeded);
    ASSERT_TRUE(r.quality);
    EXPECT_DOUBLE_EQ(*r.quality, gt.at(r.fixture));
  }
}

TEST(Runner, BaselineIsDeterministic) {
  const std::vector<Fixture> fs{fixture("mix"), fixture("seq")};
  auto p = mock("noisy", {scripts::fenced(scripts::kCycle), scripts::fenced(scripts::kReuse), kOracle});
  auto strip = [](std::vector<RunRecord> rs) {
    std::vector<nlohmann::json> out;
    for (auto& r : rs) {
      r.total_seconds = 0;
      r.iteration_seconds.clear();
      out.push_back(record_to_json(r));
    }
    return out;
  };
  auto a = strip(run_matrix(fs, {p}, {Strategy::baseline}, {}));
  auto b = strip(run_matrix(fs, {p}, {Strategy::baseline}, {}));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0]["iterations"], 3);
}

TEST(Runner, SelfEvalMakesFourGenerationsAndOneEvaluation) {
  // one reply per candidate, one score reply; any further call fails the run
  auto p = mock("scorer", {scripts::fenced(kSeq), scripts::fenced(kSeqSkip), scripts::fenced(kMix),
                           scripts::fenced(kPar), "R1: 0.7\nR2: 0.9\nR3: 0.6\nR4: 0.2", "!transport_error"});
  auto r = run_one(fixture("seq"), p, Strategy::self_eval_general);
  EXPECT_EQ(r.status, llm::SessionStatus::succeeded) << r.error;
  EXPECT_TRUE(r.error.empty()) << r.error;
  EXPECT_EQ(r.llm_scores, (std::vector<double>{0.7, 0.9, 0.6, 0.2}));
  ASSERT_TRUE(r.selected);
  EXPECT_EQ(*r.selected, 1);
  // log {ABC}: allowed/observed per prefix give precision 3/4 (A<B,A<C) and 3/6 (parallel)
  ASSERT_EQ(r.candidate_quality.size(), 4u);
  EXPECT_NEAR(*r.candidate_quality[0], 1.0, 1e-9);
  EXPECT_NEAR(*r.candidate_quality[1], 1.0, 1e-9);
  EXPECT_NEAR(*r.candidate_quality[2], 6.0 / 7.0, 1e-9);
  EXPECT_NEAR(*r.candidate_quality[3], 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(*r.quality, 1.0, 1e-9);
}

TEST(Runner, SelfEvalTieGoesToLowestIndex) {
  auto p = mock("scorer", {scripts::fenced(kPar), scripts::fenced(kSeq), scripts::fenced(kSeq), scripts::fenced(kMix),
                           "R1: 0.5\nR2: 0.8\nR3: 0.8\nR4: 0.1"});
  auto r = run_one(fixture("seq"), p, Strategy::self_eval_conformance);
  ASSERT_TRUE(r.selected);
  EXPECT_EQ(*r.selected, 1);
}

TEST(Runner, SingleSurvivingCandidateSkipsEvaluation) {
  auto p = mock("flaky", {scripts::fenced(kSeq), "!transport_error"});
  auto r = run_one(fixture("seq"), p, Strategy::self_eval_general);
  EXPECT_EQ(r.status, llm::SessionStatus::succeeded);
  EXPECT_TRUE(r.error.empty()) << r.error;
  ASSERT_TRUE(r.selected);
  EXPECT_EQ(*r.selected, 0);
  EXPECT_EQ(r.llm_scores, (std::vector<double>{-1, -1, -1, -1}));
  EXPECT_FALSE(r.candidate_quality[1]);
}

TEST(Runner, OutputOptimizationBeforeAndAfter) {
  auto p = mock("opt", {scripts::fenced(kSeq), kOracle});
  auto r = run_one(fixture("seqskip"), p, Strategy::output_opt);
  // log {AB, ABC} on A<B<C: one of two cases misses C, fitness 15/16
  ASSERT_TRUE(r.quality_before);
  EXPECT_NEAR(*r.quality_before, 2 * (15.0 / 16) / (1 + 15.0 / 16), 1e-9);
  EXPECT_NEAR(*r.quality, 1.0, 1e-9);
  EXPECT_EQ(r.sends, 1);
  EXPECT_FALSE(r.unchanged);
}

TEST(Runner, OutputOptimizationExhaustionKeepsOriginal) {
  auto p = mock("opt", {scripts::fenced(kSeq), scripts::fenced(scripts::kParseError)});
  MatrixConfig cfg;
  cfg.output_retry_limit = 3;
  auto r = run_one(fixture("seq"), p, Strategy::output_opt, cfg);
  EXPECT_EQ(r.sends, 3);
  EXPECT_NE(r.error.find("OPTIMIZATION_FAILED"), std::string::npos);
  EXPECT_EQ(r.quality, r.quality_before);
}

TEST(Runner, InputOptimizationRunsEveryShippedBand) {
  auto p9 = load_fixture(std::string(POWLGEN_FIXTURES_DIR) + "/p9");
  auto rs = run_matrix({p9, fixture("seq")}, {mock("oracle", {kOracle})}, {Strategy::input_opt}, {});
  std::set<std::string> bands;
  for (const auto& r : rs)
    if (r.fixture == "p9") bands.insert(r.band);
  EXPECT_EQ(bands, (std::set<std::string>{"long", "medium", "short"}));
  EXPECT_EQ(rs.size(), 4u);
  for (const auto& r : rs) EXPECT_EQ(r.quality_before, r.quality);
}

TEST(Runner, TransportFailureIsRecorded) {
  auto r = run_one(fixture("seq"), mock("down", {"!transport_error"}), Strategy::baseline);
  EXPECT_EQ(r.status, llm::SessionStatus::failed);
  EXPECT_FALSE(r.quality);
  EXPECT_FALSE(r.error.empty());
}

TEST(Runner, ResumeSkipsFinishedRuns) {
  TempDir d;
  const std::vector<Fixture> fs{fixture("mix"), fixture("seq"), fixture("seqskip")};
  MatrixConfig cfg;
  cfg.records_path = d.str("records.jsonl");
  int emitted = 0;
  cfg.on_record = [&](const RunRecord&) { ++emitted; };
  const std::vector<llm::ProviderConfig> ps{mock("a", {kOracle}, 2), mock("b", {kOracle}, 3)};
  auto first = run_matrix(fs, ps, {Strategy::baseline, Strategy::output_opt}, cfg);
  EXPECT_EQ(first.size(), 12u);
  EXPECT_EQ(emitted, 12);

  // drop the last line halfway, as an interrupted run would
  std::ifstream in(cfg.records_path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  in.close();
  {
    std::ofstream out(cfg.records_path, std::ios::trunc);
    for (std::size_t i = 0; i + 1 < lines.size(); ++i) out << lines[i] << "\n";
    out << lines.back().substr(0, lines.back().size() / 2);
  }
  emitted = 0;
  auto second = run_matrix(fs, ps, {Strategy::baseline, Strategy::output_opt}, cfg);
  EXPECT_EQ(emitted, 1);
  ASSERT_EQ(second.size(), 12u);
  std::set<decltype(second[0].key())> keys;
  for (const auto& r : second) keys.insert(r.key());
  EXPECT_EQ(keys.size(), 12u);
  EXPECT_EQ(load_records(cfg.records_path).size(), 12u);
}

TEST(Reports, BestSetBuffer) {
  EXPECT_EQ(best_set({1.0, 0.985, 0.98, 0.97}), (std::set<std::size_t>{0, 1, 2}));
  EXPECT_EQ(best_set({0.5, 0.9}), (std::set<std::size_t>{1}));
  EXPECT_EQ(best_set({0.5, 0.5}, 0.0), (std::set<std::size_t>{0, 1}));
  EXPECT_TRUE(best_set({}).empty());
}

TEST(Reports, SelectedSetIgnoresUnscored) {
  EXPECT_EQ(selected_set({0.3, 0.9, 0.9, -1}), (std::set<std::size_t>{1, 2}));
  EXPECT_TRUE(selected_set({-1, -1}).empty());
}

TEST(Reports, HandComputedBaselineTables) {
  using S = llm::SessionStatus;
  const std::vector<RunRecord> rs{baseline("p", 1, S::succeeded, 0.9, 2), baseline("p", 4, S::succeeded_with_autofix, 0.8, 8, true),
                                  baseline("p", 15, S::failed, std::nullopt, 30), baseline("q", 2, S::succeeded, 0.6, 1)};
  auto eh = error_handling(rs);
  ASSERT_EQ(eh.size(), 2u);
  EXPECT_EQ(eh[0].provider, "p");
  EXPECT_NEAR(eh[0].avg_iterations, 20.0 / 3, 1e-12);
  EXPECT_EQ(eh[0].without_errors, 1);
  EXPECT_EQ(eh[0].auto_adjusted, 1);
  EXPECT_EQ(eh[0].failures, 1);
  EXPECT_EQ(eh[1].without_errors, 0);
  auto q = quality(rs);
  EXPECT_NEAR(q[0].avg_quality, 1.7 / 3, 1e-12);
  EXPECT_NEAR(q[1].avg_quality, 0.6, 1e-12);
  auto t = timing(rs);
  EXPECT_NEAR(t[0].avg_total_seconds, 40.0 / 3, 1e-12);
  EXPECT_NEAR(t[0].avg_seconds_per_iteration, 2.0, 1e-12);
  EXPECT_NEAR(t[1].avg_seconds_per_iteration, 0.5, 1e-12);
}

TEST(Reports, PerfectSelectorMatchesEverywhere) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> step(0, 9);
  std::vector<RunRecord> rs;
  double best_sum = 0;
  for (int i = 0; i < 20; ++i) {
    RunRecord r;
    r.fixture = "f" + std::to_string(i);
    r.provider = "oracle";
    r.strategy = Strategy::self_eval_general;
    r.status = llm::SessionStatus::succeeded;
    // distinct multiples of 0.03 keep every best set a singleton
    std::vector<int> ks{0, 1, 2, 3};
    std::shuffle(ks.begin(), ks.end(), rng);
    for (int k : ks) {
      const double q = 0.5 + 0.03 * k + 0.001 * step(rng);
      r.candidate_quality.push_back(q);
      r.llm_scores.push_back(q);
    }
    auto it = std::max_element(r.llm_scores.begin(), r.llm_scores.end());
    r.selected = static_cast<int>(it - r.llm_scores.begin());
    r.quality = *it;
    best_sum += *it;
    rs.push_back(r);
  }
  auto rows = self_evaluation(rs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].subset_match, 20);
  EXPECT_EQ(rows[0].exact_match, 20);
  EXPECT_NEAR(rows[0].avg_selected_quality, best_sum / 20, 1e-12);
}

TEST(Reports, InversePreferenceNeverMatches) {
  RunRecord r;
  r.fixture = "f";
  r.provider = "p";
  r.strategy = Strategy::self_eval_conformance;
  r.candidate_quality = {0.9, 0.5};
  r.llm_scores = {0.1, 0.8};
  r.selected = 1;
  r.quality = 0.5;
  auto rows = self_evaluation({r});
  EXPECT_EQ(rows[0].criteria, llm::Criteria::conformance);
  EXPECT_EQ(rows[0].subset_match, 0);
  EXPECT_EQ(rows[0].exact_match, 0);
}

TEST(Reports, OutputOptimizationExtremes) {
  std::vector<RunRecord> rs;
  for (auto [b, a] : std::vector<std::pair<double, double>>{{0.5, 0.8}, {0.9, 0.7}, {0.6, 0.6}}) {
    RunRecord r;
    r.fixture = std::to_string(b);
    r.provider = "p";
    r.strategy = Strategy::output_opt;
    r.quality_before = b;
    r.quality = a;
    rs.push_back(r);
  }
  auto rows = output_optimization(rs);
  EXPECT_NEAR(rows[0].max_improvement, 0.3, 1e-12);
  EXPECT_NEAR(rows[0].max_decline, -0.2, 1e-12);
  EXPECT_NEAR(rows[0].avg_before, 2.0 / 3, 1e-12);
}

TEST(Reports, GroundTruthRowIsSelfConformance) {
  auto fs = load_fixtures(kSelfEvalDir);
  auto gt = ground_truth_quality(fs);
  auto rs = run_matrix(fs, {mock("oracle", {kOracle})}, {Strategy::baseline}, {});
  auto tables = emit_reports(rs, gt);
  const auto& t2 = tables.at(1);
  ASSERT_EQ(t2.rows.at(0).at(0), "Ground Truth");
  double sum = 0;
  for (const auto& f : fs) sum += conformance::evaluate_model(f.ground_truth, f.log).quality;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", sum / fs.size());
  EXPECT_EQ(t2.rows[0][1], buf);
}

TEST(Reports, EmitAndWrite) {
  EXPECT_THROW(emit_reports({}), std::invalid_argument);
  auto rs = run_matrix(load_fixtures(kSelfEvalDir), {mock("oracle", {kOracle})}, all_strategies(), {});
  auto tables = emit_reports(rs);
  ASSERT_EQ(tables.size(), 6u);
  EXPECT_EQ(tables[0].columns, (std::vector<std::string>{"Model", "Avg. Num. Iterations", "Num. Cases without Errors",
                                                         "Num. Cases with Auto-Adjustment", "Num. Cases with Failures"}));
  TempDir d;
  write_reports(tables, d.str());
  for (const auto& t : tables) {
    EXPECT_TRUE(fs::exists(d.path / (t.name + ".csv")));
    EXPECT_TRUE(fs::exists(d.path / (t.name + ".txt")));
    std::ifstream in(d.path / (t.name + ".csv"));
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header.substr(0, header.find(',')), t.columns[0]);
  }
  EXPECT_TRUE(fs::exists(d.path / "report.txt"));
}

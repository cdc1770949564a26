#include <fstream>
#include <sstream>

#include <benchmark/benchmark.h>

#include "powlgen/bpmn.hpp"
#include "powlgen/conformance.hpp"
#include "powlgen/dsl.hpp"
#include "powlgen/llm/generation.hpp"
#include "powlgen/petri_net.hpp"
#include "powlgen/semantics.hpp"

using namespace powlgen;

namespace {

std::string fixture_script(const std::string& id) {
  std::ifstream in(std::string(POWLGEN_FIXTURES_DIR) + "/" + id + "/ground_truth.powl");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Model fixture_model(const std::string& id) { return dsl::compile(dsl::Script{fixture_script(id)}).model; }

const char* kFixtures[] = {"bicycle", "loan_approval", "p18"};

void fixture_args(benchmark::internal::Benchmark* b) {
  for (int i = 0; i < 3; ++i) b->Arg(i);
}

}  // namespace

static void BM_Compile(benchmark::State& state) {
  const auto src = fixture_script(kFixtures[state.range(0)]);
  for (auto _ : state) benchmark::DoNotOptimize(dsl::compile(dsl::Script{src}));
  state.SetLabel(kFixtures[state.range(0)]);
}
BENCHMARK(BM_Compile)->Apply(fixture_args);

static void BM_Render(benchmark::State& state) {
  const auto m = fixture_model(kFixtures[state.range(0)]);
  for (auto _ : state) benchmark::DoNotOptimize(dsl::render(m));
  state.SetLabel(kFixtures[state.range(0)]);
}
BENCHMARK(BM_Render)->Apply(fixture_args);

static void BM_Variants(benchmark::State& state) {
  const auto m = fixture_model(kFixtures[state.range(0)]);
  std::size_t n = 0;
  for (auto _ : state) n = enumerate_variants(m).traces.size();
  state.counters["variants"] = static_cast<double>(n);
  state.SetLabel(kFixtures[state.range(0)]);
}
BENCHMARK(BM_Variants)->Apply(fixture_args)->Unit(benchmark::kMillisecond);

static void BM_PetriNet(benchmark::State& state) {
  const auto m = fixture_model(kFixtures[state.range(0)]);
  for (auto _ : state) benchmark::DoNotOptimize(petri::to_petri_net(m));
  state.SetLabel(kFixtures[state.range(0)]);
}
BENCHMARK(BM_PetriNet)->Apply(fixture_args);

static void BM_Bpmn(benchmark::State& state) {
  const auto m = fixture_model(kFixtures[state.range(0)]);
  for (auto _ : state) benchmark::DoNotOptimize(bpmn::write_bpmn_xml(bpmn::to_bpmn(m)));
  state.SetLabel(kFixtures[state.range(0)]);
}
BENCHMARK(BM_Bpmn)->Apply(fixture_args);

static void BM_Conformance(benchmark::State& state) {
  const auto m = fixture_model(kFixtures[state.range(0)]);
  const auto log = simulate_log(m);
  for (auto _ : state) benchmark::DoNotOptimize(conformance::evaluate_model(m, log));
  state.counters["cases"] = static_cast<double>(log.cases.size());
  state.SetLabel(kFixtures[state.range(0)]);
}
BENCHMARK(BM_Conformance)->Apply(fixture_args)->Unit(benchmark::kMillisecond);

static void BM_GenerationLoopMock(benchmark::State& state) {
  const auto script = fixture_script("bicycle");
  const std::vector<std::string> replies{"```python\ngen = ModelGenerator()\nfinal_model = gen.xor(\n```",
                                         "```python\n" + script + "```"};
  for (auto _ : state) {
    llm::MockProvider p(replies);
    benchmark::DoNotOptimize(llm::generate("A small company manufactures customized bicycles.", p));
  }
}
BENCHMARK(BM_GenerationLoopMock)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();

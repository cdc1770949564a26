#include "powlgen/bench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <set>
#include <thread>

#include "powlgen/dsl.hpp"
#include "powlgen/llm/self_improvement.hpp"

namespace powlgen::bench {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

struct Task {
  const Fixture* fixture;
  const llm::ProviderConfig* provider;
  Strategy strategy;
  std::string band;
};

struct Scored {
  std::optional<double> fitness, precision, quality;
  std::string error;
};

Scored score(const Model& model, const Fixture& f, const conformance::EvaluateOptions& opts) {
  Scored s;
  auto report = conformance::evaluate_model(model, f.log, opts);
  s.fitness = report.fitness;
  s.precision = report.precision;
  s.quality = report.quality;
  if (report.error) s.error = *report.error;
  return s;
}

void fill_from_session(RunRecord& r, const llm::GenerationSession& s, const Fixture& f, const MatrixConfig& cfg) {
  r.iterations = s.iteration_count();
  r.status = s.status;
  r.auto_fixed = s.auto_fixed;
  r.iteration_seconds = s.iteration_seconds();
  r.total_seconds = s.total_seconds();
  r.fitness = r.precision = r.quality = std::nullopt;
  if (s.succeeded()) {
    auto sc = score(s.final_model, f, cfg.evaluate);
    r.fitness = sc.fitness;
    r.precision = sc.precision;
    r.quality = sc.quality;
    if (!sc.error.empty()) r.error = sc.error;
  } else {
    r.error = s.failure_reason;
  }
}

llm::GenerationConfig generation_config(const MatrixConfig& cfg, const Fixture& f, std::uint64_t salt = 0) {
  auto g = cfg.generation;
  if (cfg.label_constraint) g.prompt.label_constraint = f.labels;
  g.prompt.seed = cfg.seed ^ fnv1a(f.id) ^ (salt * 0x9e3779b97f4a7c15ull);
  return g;
}

RunRecord run_task(const Task& t, const MatrixConfig& cfg) {
  const auto& f = *t.fixture;
  RunRecord r;
  r.fixture = f.id;
  r.provider = t.provider->name;
  r.strategy = t.strategy;
  r.band = t.band;
  try {
    auto provider = provider_for(*t.provider, f);
    switch (t.strategy) {
      case Strategy::baseline:
        fill_from_session(r, llm::generate(f.description, *provider, generation_config(cfg, f)), f, cfg);
        break;
      case Strategy::self_eval_general:
      case Strategy::self_eval_conformance: {
        std::vector<llm::GenerationSession> sessions;
        std::vector<llm::Candidate> pool;
        std::vector<std::size_t> pool_index;
        double seconds = 0;
        for (int i = 0; i < cfg.candidates; ++i) {
          sessions.push_back(llm::generate(f.description, *provider, generation_config(cfg, f, i)));
          const auto& s = sessions.back();
          seconds += s.total_seconds();
          if (s.succeeded()) {
            r.candidate_quality.push_back(score(s.final_model, f, cfg.evaluate).quality);
            pool.push_back({s.final_model, dsl::render(s.final_model).source});
            pool_index.push_back(sessions.size() - 1);
          } else {
            r.candidate_quality.push_back(std::nullopt);
          }
        }
        r.llm_scores.assign(sessions.size(), -1.0);
        std::optional<std::size_t> pick;
        if (pool.size() == 1) {
          pick = pool_index[0];
        } else if (pool.size() >= 2) {
          const auto criteria =
              t.strategy == Strategy::self_eval_general ? llm::Criteria::general : llm::Criteria::conformance;
          const auto t0 = Clock::now();
          try {
            auto eval = llm::self_evaluate_select(f.description, pool, criteria, *provider);
            for (std::size_t i = 0; i < pool.size(); ++i) r.llm_scores[pool_index[i]] = eval.scores[i];
            pick = pool_index[eval.selected];
          } catch (const std::exception& e) {
            r.error = e.what();
          }
          seconds += std::chrono::duration<double>(Clock::now() - t0).count();
        }
        if (pick) {
          fill_from_session(r, sessions[*pick], f, cfg);
          r.selected = static_cast<int>(*pick);
        } else {
          r.status = llm::SessionStatus::failed;
          if (r.error.empty()) r.error = "no candidate succeeded";
        }
        r.total_seconds = seconds;
        break;
      }
      case Strategy::input_opt: {
        const auto description = *f.description_for(t.band);
        auto before = llm::generate(description, *provider, generation_config(cfg, f));
        if (before.succeeded()) r.quality_before = score(before.final_model, f, cfg.evaluate).quality;
        const auto improved = llm::optimize_input(description, *provider);
        fill_from_session(r, llm::generate(improved, *provider, generation_config(cfg, f)), f, cfg);
        break;
      }
      case Strategy::output_opt: {
        auto session = llm::generate(f.description, *provider, generation_config(cfg, f));
        fill_from_session(r, session, f, cfg);
        if (!session.succeeded()) break;
        r.quality_before = r.quality;
        auto opt = llm::optimize_output(session, *provider, cfg.output_retry_limit);
        r.sends = opt.sends;
        r.unchanged = opt.unchanged;
        if (opt.optimized) {
          auto sc = score(opt.session.final_model, f, cfg.evaluate);
          r.fitness = sc.fitness;
          r.precision = sc.precision;
          r.quality = sc.quality;
        } else {
          r.error = opt.error;
        }
        break;
      }
    }
  } catch (const std::exception& e) {
    r.status = llm::SessionStatus::failed;
    r.fitness = r.precision = r.quality = std::nullopt;
    r.error = e.what();
  }
  return r;
}

}  // namespace

std::unique_ptr<llm::ChatProvider> provider_for(const llm::ProviderConfig& config, const Fixture& fixture) {
  if (config.kind != llm::ProviderKind::mock) return llm::make_provider(config);
  auto c = config;
  const std::string key = "{{ground_truth}}";
  for (auto& line : c.script)
    for (auto at = line.find(key); at != std::string::npos; at = line.find(key, at + fixture.ground_truth_script.size()))
      line.replace(at, key.size(), fixture.ground_truth_script);
  return llm::make_provider(c);
}

std::vector<RunRecord> run_matrix(const std::vector<Fixture>& fixtures, const std::vector<llm::ProviderConfig>& providers,
                                  const std::vector<Strategy>& strategies, const MatrixConfig& cfg) {
  cfg.generation.check();
  std::vector<RunRecord> records;
  std::set<std::tuple<std::string, std::string, std::string, std::string>> done;
  std::unique_ptr<RecordSink> sink;
  if (!cfg.records_path.empty()) {
    records = load_records(cfg.records_path);
    for (const auto& r : records) done.insert(r.key());
    sink = std::make_unique<RecordSink>(cfg.records_path);
  }

  std::vector<std::vector<Task>> per_provider(providers.size());
  for (std::size_t p = 0; p < providers.size(); ++p)
    for (const auto& f : fixtures)
      for (auto s : strategies) {
        std::vector<std::string> bands{"long"};
        if (s == Strategy::input_opt) {
          bands.clear();
          for (const auto& b : cfg.input_bands)
            if (f.description_for(b)) bands.push_back(b);
        }
        for (const auto& b : bands) {
          Task t{&f, &providers[p], s, b};
          if (!done.count({f.id, providers[p].name, std::string(strategy_name(s)), b})) per_provider[p].push_back(t);
        }
      }

  std::mutex mu;
  auto emit = [&](RunRecord r) {
    std::lock_guard lock(mu);
    if (sink) sink->append(r);
    if (cfg.on_record) cfg.on_record(r);
    records.push_back(std::move(r));
  };

  std::vector<std::thread> workers;
  std::vector<std::unique_ptr<std::atomic<std::size_t>>> cursors;
  for (std::size_t p = 0; p < providers.size(); ++p) {
    cursors.push_back(std::make_unique<std::atomic<std::size_t>>(0));
    const auto n = std::min<std::size_t>(std::max(1, providers[p].max_concurrency), per_provider[p].size());
    for (std::size_t w = 0; w < n; ++w)
      workers.emplace_back([&, p] {
        auto& tasks = per_provider[p];
        for (auto i = (*cursors[p])++; i < tasks.size(); i = (*cursors[p])++) emit(run_task(tasks[i], cfg));
      });
  }
  for (auto& w : workers) w.join();

  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) { return a.key() < b.key(); });
  return records;
}

std::map<std::string, double> ground_truth_quality(const std::vector<Fixture>& fixtures,
                                                   const conformance::EvaluateOptions& options) {
  std::map<std::string, double> out;
  for (const auto& f : fixtures) out[f.id] = conformance::evaluate_model(f.ground_truth, f.log, options).quality;
  return out;
}

}  // namespace powlgen::bench

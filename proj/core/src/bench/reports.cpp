#include "powlgen/bench/reports.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>

namespace powlgen::bench {

namespace {

constexpr double kEps = 1e-9;

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string signed_fixed(double v) { return (v >= 0 ? "+" : "") + fixed(v); }

double mean(const std::vector<double>& xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

template <typename Key>
std::map<Key, std::vector<const RunRecord*>> group(const std::vector<RunRecord>& records,
                                                   const std::function<bool(const RunRecord&)>& keep,
                                                   const std::function<Key(const RunRecord&)>& key) {
  std::map<Key, std::vector<const RunRecord*>> out;
  for (const auto& r : records)
    if (keep(r)) out[key(r)].push_back(&r);
  return out;
}

auto by_provider(const std::vector<RunRecord>& records, Strategy s) {
  return group<std::string>(
      records, [s](const RunRecord& r) { return r.strategy == s; }, [](const RunRecord& r) { return r.provider; });
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string band_title(const std::string& band) {
  if (band == "long") return "Long (Original)";
  if (band == "medium") return "Medium-Length (50-80%)";
  if (band == "short") return "Short (15-35%)";
  return band;
}

int band_rank(const std::string& band) { return band == "long" ? 0 : band == "medium" ? 1 : band == "short" ? 2 : 3; }

}  // namespace

std::set<std::size_t> best_set(const std::vector<double>& quality, double buffer) {
  std::set<std::size_t> out;
  if (quality.empty()) return out;
  const double best = *std::max_element(quality.begin(), quality.end());
  for (std::size_t i = 0; i < quality.size(); ++i)
    if (quality[i] >= best - buffer - kEps) out.insert(i);
  return out;
}

std::set<std::size_t> selected_set(const std::vector<double>& scores) {
  std::set<std::size_t> out;
  double best = -1;
  for (double s : scores) best = std::max(best, s);
  if (best < 0) return out;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] == best) out.insert(i);
  return out;
}

std::vector<ErrorHandlingRow> error_handling(const std::vector<RunRecord>& records) {
  std::vector<ErrorHandlingRow> out;
  for (const auto& [provider, rs] : by_provider(records, Strategy::baseline)) {
    ErrorHandlingRow row{provider, static_cast<int>(rs.size())};
    std::vector<double> its;
    for (const auto* r : rs) {
      its.push_back(r->iterations);
      if (r->iterations == 1 && r->status == llm::SessionStatus::succeeded) ++row.without_errors;
      if (r->auto_fixed) ++row.auto_adjusted;
      if (r->status == llm::SessionStatus::failed) ++row.failures;
    }
    row.avg_iterations = mean(its);
    out.push_back(row);
  }
  return out;
}

std::vector<QualityRow> quality(const std::vector<RunRecord>& records) {
  std::vector<QualityRow> out;
  for (const auto& [provider, rs] : by_provider(records, Strategy::baseline)) {
    std::vector<double> qs;
    for (const auto* r : rs) qs.push_back(r->quality.value_or(0.0));
    out.push_back({provider, static_cast<int>(rs.size()), mean(qs)});
  }
  return out;
}

std::vector<TimeRow> timing(const std::vector<RunRecord>& records) {
  std::vector<TimeRow> out;
  for (const auto& [provider, rs] : by_provider(records, Strategy::baseline)) {
    std::vector<double> total, per;
    for (const auto* r : rs) {
      total.push_back(r->total_seconds);
      if (r->iterations > 0) per.push_back(r->total_seconds / r->iterations);
    }
    out.push_back({provider, static_cast<int>(rs.size()), mean(total), mean(per)});
  }
  return out;
}

std::vector<SelfEvalRow> self_evaluation(const std::vector<RunRecord>& records) {
  std::vector<SelfEvalRow> out;
  for (auto [strategy, criteria] : {std::pair{Strategy::self_eval_general, llm::Criteria::general},
                                    std::pair{Strategy::self_eval_conformance, llm::Criteria::conformance}}) {
    for (const auto& [provider, rs] : by_provider(records, strategy)) {
      SelfEvalRow row{provider, criteria, static_cast<int>(rs.size())};
      std::size_t k = 0;
      for (const auto* r : rs) k = std::max(k, r->candidate_quality.size());
      std::vector<double> position_avg;
      for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> qs;
        for (const auto* r : rs) qs.push_back(i < r->candidate_quality.size() ? r->candidate_quality[i].value_or(0.0) : 0.0);
        position_avg.push_back(mean(qs));
      }
      if (!position_avg.empty()) {
        row.min_candidate_avg = *std::min_element(position_avg.begin(), position_avg.end());
        row.max_candidate_avg = *std::max_element(position_avg.begin(), position_avg.end());
      }
      std::vector<double> selected_q;
      for (const auto* r : rs) {
        selected_q.push_back(r->quality.value_or(0.0));
        if (!r->selected) continue;
        std::vector<double> q;
        for (const auto& c : r->candidate_quality) q.push_back(c.value_or(0.0));
        auto chosen = selected_set(r->llm_scores);
        if (chosen.empty()) chosen = {static_cast<std::size_t>(*r->selected)};
        const auto best = best_set(q);
        if (std::includes(best.begin(), best.end(), chosen.begin(), chosen.end())) ++row.subset_match;
        if (chosen == best) ++row.exact_match;
      }
      row.avg_selected_quality = mean(selected_q);
      out.push_back(row);
    }
  }
  return out;
}

std::vector<InputOptRow> input_optimization(const std::vector<RunRecord>& records) {
  auto groups = group<std::pair<std::string, std::string>>(
      records, [](const RunRecord& r) { return r.strategy == Strategy::input_opt; },
      [](const RunRecord& r) { return std::pair{r.provider, r.band}; });
  std::vector<InputOptRow> out;
  for (const auto& [key, rs] : groups) {
    InputOptRow row{key.first, key.second, static_cast<int>(rs.size())};
    std::vector<double> before, after;
    for (const auto* r : rs) {
      before.push_back(r->quality_before.value_or(0.0));
      after.push_back(r->quality.value_or(0.0));
      if (after.back() > before.back() + kEps) ++row.increased;
    }
    row.avg_before = mean(before);
    row.avg_after = mean(after);
    out.push_back(row);
  }
  std::stable_sort(out.begin(), out.end(), [](const InputOptRow& a, const InputOptRow& b) {
    return std::pair{a.provider, band_rank(a.band)} < std::pair{b.provider, band_rank(b.band)};
  });
  return out;
}

std::vector<OutputOptRow> output_optimization(const std::vector<RunRecord>& records) {
  std::vector<OutputOptRow> out;
  for (const auto& [provider, rs] : by_provider(records, Strategy::output_opt)) {
    OutputOptRow row{provider, static_cast<int>(rs.size())};
    std::vector<double> before, after;
    for (const auto* r : rs) {
      before.push_back(r->quality_before.value_or(0.0));
      after.push_back(r->quality.value_or(0.0));
      const double d = after.back() - before.back();
      row.max_improvement = std::max(row.max_improvement, d);
      row.max_decline = std::min(row.max_decline, d);
    }
    row.avg_before = mean(before);
    row.avg_after = mean(after);
    out.push_back(row);
  }
  return out;
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
    out += "\n";
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return out;
}

std::string Table::to_text() const {
  std::vector<std::size_t> width(columns.size());
  for (std::size_t i = 0; i < columns.size(); ++i) width[i] = columns[i].size();
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
  std::string out = title + "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    std::string l;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) l += "  ";
      l += i == 0 ? cells[i] + std::string(width[i] - cells[i].size(), ' ')
                  : std::string(width[i] - cells[i].size(), ' ') + cells[i];
    }
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out += l + "\n";
  };
  line(columns);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out += std::string(total > 2 ? total - 2 : 0, '-') + "\n";
  for (const auto& r : rows) line(r);
  return out;
}

std::vector<Table> emit_reports(const std::vector<RunRecord>& records,
                                const std::optional<std::map<std::string, double>>& ground_truth) {
  if (records.empty()) throw std::invalid_argument("no run records");
  std::vector<Table> tables;

  auto t1 = error_handling(records);
  std::stable_sort(t1.begin(), t1.end(), [](auto& a, auto& b) { return a.avg_iterations < b.avg_iterations; });
  Table table1{"table1_error_handling",
               "Error handling performance",
               {"Model", "Avg. Num. Iterations", "Num. Cases without Errors", "Num. Cases with Auto-Adjustment",
                "Num. Cases with Failures"}, {}};
  for (const auto& r : t1)
    table1.rows.push_back({r.provider, fixed(r.avg_iterations), std::to_string(r.without_errors),
                           std::to_string(r.auto_adjusted), std::to_string(r.failures)});
  tables.push_back(std::move(table1));

  auto t2 = quality(records);
  std::stable_sort(t2.begin(), t2.end(), [](auto& a, auto& b) { return a.avg_quality > b.avg_quality; });
  Table table2{"table2_quality", "Average quality scores", {"Model", "Avg. Score"}, {}};
  if (ground_truth && !ground_truth->empty()) {
    std::vector<double> qs;
    for (const auto& [_, q] : *ground_truth) qs.push_back(q);
    table2.rows.push_back({"Ground Truth", fixed(mean(qs))});
  }
  for (const auto& r : t2) table2.rows.push_back({r.provider, fixed(r.avg_quality)});
  tables.push_back(std::move(table2));

  auto t3 = timing(records);
  std::stable_sort(t3.begin(), t3.end(), [](auto& a, auto& b) { return a.avg_total_seconds < b.avg_total_seconds; });
  Table table3{"table3_time", "Time efficiency", {"Model", "Avg. Total Time (sec)", "Avg. Time per Iteration (sec)"}, {}};
  for (const auto& r : t3)
    table3.rows.push_back({r.provider, fixed(r.avg_total_seconds), fixed(r.avg_seconds_per_iteration)});
  tables.push_back(std::move(table3));

  Table table4{"table4_self_evaluation",
               "Self-evaluation",
               {"LLM", "Avg. Quality Without Self-Eval. (R1-R4)", "Evaluation Criteria", "Subset Match", "Exact Match",
                "Avg. Quality With Self-Eval."}, {}};
  auto t4 = self_evaluation(records);
  std::stable_sort(t4.begin(), t4.end(), [](auto& a, auto& b) { return a.provider < b.provider; });
  for (const auto& r : t4)
    table4.rows.push_back({r.provider, fixed(r.min_candidate_avg) + "-" + fixed(r.max_candidate_avg),
                           r.criteria == llm::Criteria::general ? "General" : "Conformance",
                           std::to_string(r.subset_match) + "/" + std::to_string(r.cases),
                           std::to_string(r.exact_match) + "/" + std::to_string(r.cases),
                           fixed(r.avg_selected_quality)});
  tables.push_back(std::move(table4));

  Table table5{"table5_input_optimization",
               "Input self-optimization",
               {"LLM", "Description Length", "Avg. Quality Before Self-Improvement",
                "Avg. Quality After Self-Improvement", "Cases With Increased Quality"}, {}};
  for (const auto& r : input_optimization(records))
    table5.rows.push_back({r.provider, band_title(r.band), fixed(r.avg_before), fixed(r.avg_after),
                           std::to_string(r.increased) + "/" + std::to_string(r.cases)});
  tables.push_back(std::move(table5));

  Table table6{"table6_output_optimization",
               "Output self-optimization",
               {"LLM", "Avg. Quality Before Self-Improvement", "Avg. Quality After Self-Improvement",
                "Max. Improvement", "Max. Decline"}, {}};
  for (const auto& r : output_optimization(records))
    table6.rows.push_back({r.provider, fixed(r.avg_before), fixed(r.avg_after), signed_fixed(r.max_improvement),
                           (r.max_decline < 0 ? fixed(r.max_decline) : "-" + fixed(0.0))});
  tables.push_back(std::move(table6));
  return tables;
}

void write_reports(const std::vector<Table>& tables, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::string all;
  for (const auto& t : tables) {
    std::ofstream(std::filesystem::path(dir) / (t.name + ".csv")) << t.to_csv();
    std::ofstream(std::filesystem::path(dir) / (t.name + ".txt")) << t.to_text();
    all += t.to_text() + "\n";
  }
  std::ofstream(std::filesystem::path(dir) / "report.txt") << all;
}

}  // namespace powlgen::bench

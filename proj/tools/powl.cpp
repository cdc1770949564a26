#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "powlgen/bpmn.hpp"
#include "powlgen/conformance.hpp"
#include "powlgen/dsl.hpp"
#include "powlgen/llm/generation.hpp"
#include "powlgen/model_json.hpp"
#include "powlgen/petri_net.hpp"
#include "powlgen/semantics.hpp"

using namespace powlgen;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_diagnostics(const ValidationReport& r) {
  for (const auto& d : r.diagnostics())
    std::cerr << severity_name(d.severity()) << ": " << to_string(d) << "\n";
}

Model load_model(const std::string& path) {
  auto r = dsl::compile_file(path);
  print_diagnostics(r.report);
  if (!r.model || !r.report.is_valid()) throw std::runtime_error(path + ": not a valid model");
  if (r.report.has(Severity::adjustable)) return auto_fix_reuse(r.model).model;
  return r.model;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"POWL model toolkit"};
  app.require_subcommand(1);

  std::string file, out, format = "bpmn", log_path, description_path, providers_path, provider_name, labels_from;
  int loop_cap = 2;
  std::size_t max_variants = 10000;
  bool reduce = false, as_json = false, xes = false;
  std::uint64_t seed = 0;

  auto* check = app.add_subcommand("check", "Compile a construction script and report diagnostics");
  check->add_option("script", file)->required()->check(CLI::ExistingFile);

  auto* render = app.add_subcommand("render", "Print the canonical script of a model");
  render->add_option("script", file)->required()->check(CLI::ExistingFile);
  render->add_option("-o,--out", out);

  auto* exp = app.add_subcommand("export", "Translate a model to BPMN, PNML, DOT or JSON");
  exp->add_option("script", file)->required()->check(CLI::ExistingFile);
  exp->add_option("-f,--format", format)->check(CLI::IsMember({"bpmn", "bpmn-dot", "pnml", "dot", "json"}));
  exp->add_option("-o,--out", out);
  exp->add_flag("--reduce", reduce, "Remove silent transitions from the Petri net");

  auto* var = app.add_subcommand("variants", "Enumerate trace variants");
  var->add_option("script", file)->required()->check(CLI::ExistingFile);
  var->add_option("--loop-cap", loop_cap);
  var->add_option("--max-variants", max_variants);

  auto* sim = app.add_subcommand("simulate", "Write an event log with one case per variant");
  sim->add_option("script", file)->required()->check(CLI::ExistingFile);
  sim->add_option("-o,--out", out);
  sim->add_option("--loop-cap", loop_cap);
  sim->add_option("--max-variants", max_variants);
  sim->add_flag("--xes", xes);

  auto* conf = app.add_subcommand("conformance", "Fitness, precision and quality of a model against a log");
  conf->add_option("script", file)->required()->check(CLI::ExistingFile);
  conf->add_option("-l,--log", log_path, "CSV event log; simulated from the model when omitted");
  conf->add_flag("--reduce", reduce);
  conf->add_flag("--json", as_json);

  auto* gen = app.add_subcommand("generate", "Generate a model from a process description");
  gen->add_option("description", description_path)->required()->check(CLI::ExistingFile);
  gen->add_option("-p,--providers", providers_path)->required()->check(CLI::ExistingFile);
  gen->add_option("-n,--provider", provider_name, "Provider name (default: first)");
  gen->add_option("--labels-from", labels_from, "Constrain labels to those of this script")->check(CLI::ExistingFile);
  gen->add_option("--seed", seed);
  gen->add_option("-o,--out", out);
  gen->add_flag("--json", as_json, "Print the whole session as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    SimulationConfig sim_cfg{loop_cap, max_variants};
    if (*check) {
      auto r = dsl::compile_file(file);
      print_diagnostics(r.report);
      if (!r.model || !r.report.is_valid()) return 1;
      auto s = stats(r.model);
      std::cout << "activities " << s.activities << ", choices " << s.choices << ", loops " << s.loops
                << ", partial orders " << s.partial_orders << ", silent " << s.silents << "\n";
    } else if (*render) {
      emit(dsl::render(load_model(file)).source, out);
    } else if (*exp) {
      auto m = load_model(file);
      std::string text;
      if (format == "bpmn")
        text = bpmn::write_bpmn_xml(bpmn::to_bpmn(m));
      else if (format == "bpmn-dot")
        text = bpmn::write_dot(bpmn::to_bpmn(m));
      else if (format == "json")
        text = model_to_json(m).dump(2) + "\n";
      else {
        auto net = petri::to_petri_net(m);
        if (reduce) net = petri::reduce_silent(net);
        text = format == "pnml" ? petri::write_pnml(net) : petri::write_dot(net);
      }
      emit(text, out);
    } else if (*var) {
      auto v = enumerate_variants(load_model(file), sim_cfg);
      for (const auto& t : v.traces) {
        for (std::size_t i = 0; i < t.size(); ++i) std::cout << (i ? " -> " : "") << t[i];
        std::cout << (t.empty() ? "<empty>\n" : "\n");
      }
      std::cerr << v.traces.size() << " variants" << (v.truncated ? " (truncated)" : "") << "\n";
      if (v.truncated) return 2;
    } else if (*sim) {
      auto log = simulate_log(load_model(file), sim_cfg);
      emit(xes ? write_xes(log) : write_csv(log), out);
    } else if (*conf) {
      auto m = load_model(file);
      auto log = log_path.empty() ? simulate_log(m, sim_cfg) : read_csv(slurp(log_path));
      auto report = conformance::evaluate_model(m, log, {reduce});
      if (as_json) {
        auto j = conformance::report_to_json(report);
        j.erase("per_trace");
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << "fitness   " << report.fitness << "\nprecision " << report.precision << "\nquality   "
                  << report.quality << "\n";
      }
      if (report.error) {
        std::cerr << *report.error << "\n";
        return 1;
      }
    } else if (*gen) {
      auto providers = llm::load_provider_configs(providers_path);
      auto it = std::find_if(providers.begin(), providers.end(),
                             [&](const auto& p) { return provider_name.empty() || p.name == provider_name; });
      if (it == providers.end()) throw std::runtime_error("no provider named " + provider_name);
      auto provider = llm::make_provider(*it);
      llm::GenerationConfig cfg;
      cfg.prompt.seed = seed;
      if (!labels_from.empty()) cfg.prompt.label_constraint = activity_labels(load_model(labels_from));
      auto session = llm::generate(slurp(description_path), *provider, cfg);
      for (const auto& rec : session.iterations) {
        std::cerr << "iteration " << rec.attempt << ": " << rec.diagnostics.size() << " diagnostics\n";
        for (const auto& d : rec.diagnostics) std::cerr << "  " << to_string(d) << "\n";
      }
      std::cerr << "status " << llm::status_name(session.status) << "\n";
      if (as_json)
        emit(llm::session_to_json(session).dump(2) + "\n", out);
      else if (session.final_model)
        emit(dsl::render(session.final_model).source, out);
      if (!session.succeeded()) return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

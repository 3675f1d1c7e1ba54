// Command line front end: run a scenario file, exhaustively enumerate its
// schedules, re-check a saved trace, or list the bundled scenarios.
//
// Exit codes: 0 all checked properties satisfied, 1 at least one violated,
// 2 inconclusive (horizon or search bound) or any configuration error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "unilab/checkers.hpp"
#include "unilab/enumerate.hpp"
#include "unilab/observations.hpp"
#include "unilab/scenario.hpp"
#include "unilab/types.hpp"

namespace {

using namespace unilab;

#ifndef UNILAB_SCENARIO_DIR
#define UNILAB_SCENARIO_DIR "scenarios"
#endif

void print_results(
    const std::vector<std::pair<std::string, CheckResult>>& results) {
  for (const auto& [name, r] : results) {
    std::cout << "  " << name << ": " << verdict_name(r.verdict);
    if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << "\n";
  }
}

int verdict_exit(
    const std::vector<std::pair<std::string, CheckResult>>& results) {
  bool inconclusive = false;
  for (const auto& [name, r] : results) {
    if (r.verdict == Verdict::Violated) return 1;
    if (r.verdict == Verdict::Inconclusive) inconclusive = true;
  }
  return inconclusive ? 2 : 0;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

int cmd_run(const std::string& file, std::optional<std::uint64_t> seed,
            const std::string& trace_out) {
  ScenarioConfig cfg = load_scenario_file(file);
  if (seed) cfg.seed = *seed;
  ScenarioRun run = run_scenario(cfg);

  std::cout << "scenario " << cfg.name << ": protocol " << cfg.protocol
            << ", n=" << cfg.params.n << ", t=" << cfg.params.t << ", seed "
            << cfg.seed << "\n";
  std::cout << "trace: " << run.trace.entries.size() << " events";
  if (run.trace.horizon_exceeded) std::cout << ", held deliveries remain";
  std::cout << "\n";
  print_results(run.results);

  if (!trace_out.empty()) {
    if (!write_file(trace_out, run.trace.to_text())) {
      std::cerr << "error: cannot write " << trace_out << "\n";
      return 2;
    }
    std::cout << "trace written to " << trace_out << "\n";
  }
  return verdict_exit(run.results);
}

int cmd_enumerate(const std::string& file, std::uint64_t bound,
                  bool deliveries_only, const std::string& trace_out) {
  ScenarioConfig cfg = load_scenario_file(file);
  auto root = build_simulation(cfg);
  ScenarioMeta meta = meta_of(cfg);
  EnumOptions opts;
  opts.state_bound = bound;
  opts.properties = effective_properties(cfg);
  opts.branch_messages_only = deliveries_only;

  EnumReport rep = enumerate_schedules(*root, meta, opts);

  std::cout << "scenario " << cfg.name << ": protocol " << cfg.protocol
            << ", n=" << cfg.params.n << ", t=" << cfg.params.t << "\n";
  std::cout << "explored " << rep.states << " states, " << rep.transitions
            << " transitions, " << rep.terminals << " terminal states\n";
  std::cout << "schedules: " << rep.schedules_text() << "\n";
  for (const auto& prop : opts.properties) {
    auto it = rep.violating_terminals.find(prop);
    std::uint64_t bad = it == rep.violating_terminals.end() ? 0 : it->second;
    if (bad == 0)
      std::cout << "  " << prop << ": no violations\n";
    else
      std::cout << "  " << prop << ": violated in " << bad
                << " terminal state(s)\n";
  }

  if (rep.first_witness) {
    std::cout << "witness choices:";
    for (std::uint32_t c : *rep.first_witness) std::cout << " " << c;
    std::cout << "\n";
    if (!trace_out.empty()) {
      auto witness = replay_choices(*root, *rep.first_witness, deliveries_only);
      witness->step();  // no event left to run; finalizes the pending flag
      Trace trace = witness->trace();
      stamp_trace_meta(trace, cfg);
      if (!write_file(trace_out, trace.to_text())) {
        std::cerr << "error: cannot write " << trace_out << "\n";
        return 2;
      }
      std::cout << "witness trace written to " << trace_out << "\n";
    }
  }
  return rep.found_violation() ? 1 : 0;
}

int cmd_check(const std::string& file,
              const std::vector<std::string>& properties) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << file << "\n";
    return 2;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  auto trace = Trace::parse(buf.str());
  if (!trace) {
    std::cerr << "error: " << file << " is not a trace file\n";
    return 2;
  }

  ScenarioMeta meta = meta_from_trace(*trace);
  Observations obs =
      observations_from_trace(*trace, meta.params.n, meta.byzantine);

  std::cout << "trace: " << trace->entries.size() << " events";
  if (trace->horizon_exceeded) std::cout << ", held deliveries remain";
  std::cout << "\n";

  std::vector<std::pair<std::string, CheckResult>> results;
  for (const auto& prop : properties)
    results.emplace_back(prop, check_property(prop, meta, obs));
  print_results(results);
  return verdict_exit(results);
}

int cmd_list(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.path().extension() == ".scn") files.push_back(entry.path());
  if (ec) {
    std::cerr << "error: cannot read " << dir << ": " << ec.message() << "\n";
    return 2;
  }
  std::sort(files.begin(), files.end());

  if (files.empty()) {
    std::cout << "no scenario files in " << dir << "\n";
    return 0;
  }
  for (const auto& path : files) {
    std::cout << path.filename().string();
    try {
      ScenarioConfig cfg = load_scenario_file(path.string());
      std::cout << ": " << cfg.protocol << ", n=" << cfg.params.n
                << ", t=" << cfg.params.t;
      std::size_t byz = scenario_byzantine(cfg).size();
      if (byz > 0) std::cout << ", " << byz << " faulty";
      std::cout << "\n";
    } catch (const SimError& e) {
      std::cout << ": unreadable (" << e.what() << ")\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulation workbench for broadcast rounds"};
  app.require_subcommand(1);

  std::string scn_file;
  std::uint64_t seed_value = 0;
  std::string trace_out;
  auto* run = app.add_subcommand("run", "Run one scenario and check it");
  run->add_option("file", scn_file, "scenario file (.scn)")->required();
  auto* seed_opt =
      run->add_option("--seed", seed_value, "override the scenario's seed");
  run->add_option("--trace", trace_out, "write the trace to this file");

  std::string enum_file;
  std::uint64_t bound = 2'000'000;
  bool deliveries_only = false;
  std::string enum_trace_out;
  auto* enumerate = app.add_subcommand(
      "enumerate", "Explore every schedule of one scenario");
  enumerate->add_option("file", enum_file, "scenario file (.scn)")->required();
  enumerate->add_option("--bound", bound, "distinct-state limit");
  enumerate->add_flag("--deliveries-only", deliveries_only,
                      "branch only on message delivery order");
  enumerate->add_option("--trace", enum_trace_out,
                        "write the first violating schedule's trace here");

  std::string trace_file;
  std::vector<std::string> properties;
  auto* check = app.add_subcommand("check", "Re-check a saved trace file");
  check->add_option("file", trace_file, "trace file")->required();
  check
      ->add_option("--property", properties,
                   "property to check (repeatable)")
      ->required();

  std::string dir = UNILAB_SCENARIO_DIR;
  auto* list = app.add_subcommand("list-scenarios", "List bundled scenarios");
  list->add_option("--dir", dir, "scenario directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      std::optional<std::uint64_t> seed;
      if (seed_opt->count() > 0) seed = seed_value;
      return cmd_run(scn_file, seed, trace_out);
    }
    if (enumerate->parsed())
      return cmd_enumerate(enum_file, bound, deliveries_only, enum_trace_out);
    if (check->parsed()) return cmd_check(trace_file, properties);
    if (list->parsed()) return cmd_list(dir);
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

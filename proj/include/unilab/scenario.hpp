#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "unilab/checkers.hpp"
#include "unilab/kernel.hpp"
#include "unilab/policy.hpp"
#include "unilab/types.hpp"

namespace unilab {

/// Per-process overrides from a [process N] section. A process with a
/// behavior is the scripted faulty kind; everything else about it is
/// handed to the behavior factory.
struct ProcessOverride {
  std::optional<std::string> behavior;
  std::map<std::string, std::string> behavior_params;
  std::optional<Payload> input;
  std::optional<std::vector<std::pair<std::uint64_t, Payload>>> schedule;
};

/// A parsed scenario file: flat key = value pairs, with [process N]
/// sections for overrides and [link A B] sections for delivery rules.
struct ScenarioConfig {
  std::string name = "unnamed";
  std::string protocol;
  SystemParams params{3, 1};
  std::uint64_t seed = 0;
  std::uint32_t delay_spread = 0;
  std::uint64_t horizon = 100000;
  ProcessId sender = 0;                // single-sender broadcast sessions
  std::vector<Payload> broadcasts;     // that sender's payloads, in order
  std::optional<Payload> default_input;
  std::string transport = "channel";   // two-phase rounds: channel | plain
  std::vector<std::string> properties;  // empty: protocol defaults
  std::map<ProcessId, ProcessOverride> overrides;
  std::vector<LinkRule> rules;
};

ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);

const std::vector<std::string>& known_protocols();

/// Effective input payload of one process (override, scenario default, or
/// a distinct generated value).
Payload scenario_input(const ScenarioConfig&, ProcessId p);

std::set<ProcessId> scenario_byzantine(const ScenarioConfig&);

ScenarioMeta meta_of(const ScenarioConfig&);

/// Properties checked when a scenario names none.
std::vector<std::string> default_properties(const std::string& protocol);

std::vector<std::string> effective_properties(const ScenarioConfig&);

std::unique_ptr<Simulation> build_simulation(const ScenarioConfig&);

/// Write the scenario's identity (protocol, sizes, seed, faulty set,
/// inputs) into a trace header so the trace checks standalone.
void stamp_trace_meta(Trace&, const ScenarioConfig&);

struct ScenarioRun {
  Trace trace;
  Observations observations;
  std::vector<std::pair<std::string, CheckResult>> results;

  bool any_violated() const {
    for (const auto& [name, r] : results)
      if (r.verdict == Verdict::Violated) return true;
    return false;
  }
};

/// Build, run to quiescence, stamp trace metadata, extract observations
/// from the trace, and evaluate the effective properties.
ScenarioRun run_scenario(const ScenarioConfig&);

/// Reconstruct checker metadata from a serialized trace's header, for
/// checking traces without their scenario files.
ScenarioMeta meta_from_trace(const Trace&);

}  // namespace unilab

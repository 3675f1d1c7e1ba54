#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "unilab/observations.hpp"
#include "unilab/types.hpp"

namespace unilab {

/// Facts about a run that observations alone do not carry: who was meant
/// to be faulty, whether the schedule withheld links forever, what the
/// inputs were. Checkers combine this with the observations.
struct ScenarioMeta {
  SystemParams params;
  std::string protocol;
  std::set<ProcessId> byzantine;
  std::map<ProcessId, Payload> inputs;
  bool holds_present = false;
};

enum class Verdict : std::uint8_t { Satisfied, Violated, Inconclusive };

const char* verdict_name(Verdict);

struct CheckResult {
  Verdict verdict = Verdict::Satisfied;
  std::string detail;
};

/// Verdict conventions
/// -------------------
/// Safety properties are judged on what happened and are always definite.
/// Liveness properties are judged against the run's end: at a quiescent end
/// with every link eventually delivering, "eventually" has run out, so an
/// unsatisfied obligation is a violation; if links were withheld or the
/// event budget cut the run short, it is Inconclusive instead.

CheckResult check_property(const std::string& name, const ScenarioMeta&,
                           const Observations&);

std::vector<std::string> property_names();
bool property_exists(const std::string& name);

/// All pairs of correct processes that both finished some common round
/// without either having received from the other before finishing. An
/// empty result is exactly verdict Satisfied for "unidirectional".
std::vector<std::pair<ProcessId, ProcessId>> unidirectional_violations(
    const Observations&);

/// Verifier-side attestation store recomputed from one process's delivery
/// sequence: holder -> counter -> (sequence, message). Mirrors the rule
/// that only counter increases are stored.
std::map<ProcessId,
         std::map<std::uint64_t, std::pair<std::uint64_t, Payload>>>
recompute_attestation_store(const ProcObs& verifier);

/// Stamp fault flags onto observations collected from machine state, which
/// has no idea who was scripted as faulty.
void mark_byzantine(Observations&, const std::set<ProcessId>& byzantine);

}  // namespace unilab

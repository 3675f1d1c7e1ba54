#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "unilab/checkers.hpp"
#include "unilab/kernel.hpp"

namespace unilab {

struct EnumOptions {
  /// Distinct states allowed before giving up with BoundExceeded.
  std::uint64_t state_bound = 2'000'000;
  /// Properties evaluated at every terminal state.
  std::vector<std::string> properties;
  /// Branch only on message delivery order. Every other enabled event
  /// (register operation, activation) applies eagerly in a fixed
  /// deterministic order between deliveries, so the schedule count counts
  /// network orderings alone. Keeps chatty protocols within reach of the
  /// state bound; register-level races are then outside the explored set.
  bool branch_messages_only = false;
};

/// Exhaustive exploration result. Schedule counts are exact path counts
/// through the deduplicated state graph, which equal the number of
/// distinct maximal event interleavings the link discipline admits; they
/// saturate at the 128 bit ceiling with schedules_exact turning false.
struct EnumReport {
  std::uint64_t states = 0;
  std::uint64_t transitions = 0;
  std::uint64_t terminals = 0;
  unsigned __int128 schedules = 0;
  bool schedules_exact = true;
  /// property -> number of distinct terminal states violating it.
  std::map<std::string, std::uint64_t> violating_terminals;
  /// Choice-index path to the first violating terminal found, replayable
  /// with replay_choices.
  std::optional<std::vector<std::uint32_t>> first_witness;

  bool found_violation() const {
    for (const auto& [p, c] : violating_terminals)
      if (c > 0) return true;
    return false;
  }

  std::string schedules_text() const;
};

std::string u128_text(unsigned __int128 v);

/// Explore every schedule reachable from root. Equal-state subtrees are
/// explored once; terminal-state property verdicts lose nothing by this
/// because they depend only on the state. The root is not modified.
EnumReport enumerate_schedules(const Simulation& root, const ScenarioMeta& meta,
                               const EnumOptions& opts = {});

/// Re-run a choice-index path (as produced in first_witness) with tracing
/// on; returns the simulation positioned at the end of the path. The
/// branch_messages_only flag must match the enumeration that produced the
/// path, since it changes what the indices select.
std::unique_ptr<Simulation> replay_choices(
    const Simulation& root, const std::vector<std::uint32_t>& choices,
    bool branch_messages_only = false);

/// Dispatch the pending start events so enumeration begins from the state
/// where every process has run its start callback. Start events commute
/// (each touches only its own process), so this prunes no reachable state.
void dispatch_starts(Simulation&);

}  // namespace unilab

#pragma once

#include <cstdint>
#include <optional>

#include "unilab/machine.hpp"
#include "unilab/rounds.hpp"
#include "unilab/types.hpp"

namespace unilab {

/// Decision rule for very weak Byzantine agreement over one communication
/// round: commit the own input unless any received value differs from it,
/// in which case commit nothing (nullopt, rendered as bottom).
std::optional<Payload> vwba_decide(const Payload& input,
                                   const std::vector<Payload>& received);

/// One register round, no decision: send the configured payload in round 1,
/// read everyone, finish. The minimal protocol whose rounds are
/// unidirectional for every pair of correct participants.
class UniSwmrNode : public Machine {
 public:
  UniSwmrNode(SystemParams params, ProcessId self, Payload payload);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void on_read(Ctx&, const Snapshot&, std::uint64_t token) override;
  void on_append_applied(Ctx&, std::uint64_t round) override;
  void hash_state(Encoder&) const override;
  void collect(ProcessId self, Observations&) const override;

  const SwmrRoundDriver& round() const { return round_; }

 private:
  SystemParams params_;
  ProcessId self_;
  Payload payload_;
  SwmrRoundDriver round_;
};

/// Very weak Byzantine agreement (n > t): one register round with the own
/// input, then decide by vwba_decide over everything read in the round.
/// Agreement is weak: two correct processes never commit different values,
/// though either may commit bottom.
class VwbaNode : public Machine {
 public:
  VwbaNode(SystemParams params, ProcessId self, Payload input);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void on_read(Ctx&, const Snapshot&, std::uint64_t token) override;
  void on_append_applied(Ctx&, std::uint64_t round) override;
  void hash_state(Encoder&) const override;
  void collect(ProcessId self, Observations&) const override;

  bool decided() const { return decided_; }
  const std::optional<Payload>& decision() const { return decision_; }

 private:
  void maybe_decide(Ctx&);

  SystemParams params_;
  ProcessId self_;
  Payload input_;
  SwmrRoundDriver round_;
  bool decided_ = false;
  std::optional<Payload> decision_;
};

}  // namespace unilab

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "unilab/machine.hpp"
#include "unilab/messages.hpp"
#include "unilab/rounds.hpp"
#include "unilab/types.hpp"

namespace unilab {

/// Two-phase round over a non-equivocating broadcast channel, tolerating a
/// single fault at n >= 3. Phase 1: broadcast the signed round value and
/// wait for phase 1 messages from n-1 distinct processes (the own delivery
/// counts). Phase 2: broadcast the bundle of everything received and wait
/// for valid bundles (>= 2 entries with distinct valid signatures) from
/// n-1 distinct processes. Values inside bundles count as received, which
/// is what keeps rounds unidirectional when a link stalls: some third
/// process's bundle carries the stalled peer's value. Set plain_transport
/// to route both phases over bare point-to-point sends instead, dropping
/// the channel's guarantees (for demonstrating they are load-bearing).
class RbF1Node : public Machine {
 public:
  RbF1Node(SystemParams params, ProcessId self, Payload value,
           bool plain_transport = false);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void on_message(Ctx&, ProcessId from, const Payload& bytes) override;
  void on_rb_deliver(Ctx&, ProcessId from, std::uint64_t seq,
                     const Payload& bytes) override;
  void hash_state(Encoder&) const override;
  void collect(ProcessId self, Observations&) const override;

  bool finished() const { return finished_; }
  const std::map<ProcessId, Payload>& received() const { return received_; }

 private:
  struct Rcpt {
    ProcessId from = 0;
    Payload v;
    ProcessId via = 0;
    bool pre_finish = false;
  };

  void handle(Ctx&, ProcessId from, const Payload& bytes);
  void add_received(Ctx&, ProcessId from, const Payload& v, ProcessId via);
  void maybe_enter_phase2(Ctx&);
  void maybe_finish(Ctx&);

  SystemParams params_;
  ProcessId self_;
  Payload value_;
  bool plain_transport_ = false;
  std::uint8_t phase_ = 1;
  std::map<ProcessId, std::pair<Payload, Signature>> phase1_;
  std::set<ProcessId> phase2_senders_;
  std::map<ProcessId, Payload> received_;
  std::vector<Rcpt> recv_log_;
  bool finished_ = false;
};

/// The naive construction the two-phase protocol replaces: broadcast the
/// round value once, finish after values from n - t distinct processes.
/// Its rounds stop being unidirectional once links can stall: two
/// processes on opposite sides of a partition both finish on quorums that
/// exclude each other.
class NaiveRbNode : public Machine {
 public:
  NaiveRbNode(SystemParams params, ProcessId self, Payload value);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void on_rb_deliver(Ctx&, ProcessId from, std::uint64_t seq,
                     const Payload& bytes) override;
  void hash_state(Encoder&) const override;
  void collect(ProcessId self, Observations&) const override;

  bool finished() const { return finished_; }

 private:
  struct Rcpt {
    ProcessId from = 0;
    Payload v;
    bool pre_finish = false;
  };

  SystemParams params_;
  ProcessId self_;
  Payload value_;
  std::map<ProcessId, Payload> received_;
  std::vector<Rcpt> recv_log_;
  bool finished_ = false;
};

}  // namespace unilab

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "unilab/machine.hpp"
#include "unilab/messages.hpp"
#include "unilab/rounds.hpp"
#include "unilab/types.hpp"

namespace unilab {

class SrbMux;

/// Host callback invoked at the sequenced-broadcast delivery point.
struct SrbDeliverHook {
  virtual ~SrbDeliverHook() = default;
  virtual void on_srb_deliver(Ctx&, ProcessId sender, std::uint64_t k,
                              const Payload& m) {}
};

/// Sequenced reliable broadcast, one state machine per (process, sender
/// instance), multiplexed over the host process's single register.
///
/// Properties provided (n >= 2t+1):
///  - correct-sender totality: a correct sender's k-th broadcast is
///    eventually delivered by every correct process;
///  - totality: if any correct process delivers (k, m) from q, every
///    correct process eventually does;
///  - gapless sequencing: each process delivers sequence numbers from each
///    sender in order 1, 2, ... with no gaps;
///  - integrity: for a correct sender, only (k, m) the sender actually
///    broadcast are delivered.
///
/// Flow per sequence number k: the sender signs and sends (k, m) to all;
/// receivers countersign the first valid value as a copy and put it in a
/// register round; t+1 matching copies compile into a signed L1 proof,
/// shared through a second register round; t+1 L1 proofs compile into an L2
/// proof sent to all; a valid L2 proof for the next expected sequence is
/// the delivery trigger and is forwarded to all on delivery.
///
/// A process that saw a validly signed conflicting value for k permanently
/// refuses to compile an L1 proof for k (it can still deliver through
/// other processes' L2 proofs). Sender values and L2 proofs arriving ahead
/// of the delivery cursor are buffered, never dropped: with back-to-back
/// broadcasts, later sender values overtake the per-sequence rounds.
class SrbMux {
 public:
  enum class Phase : std::uint8_t {
    WaitForSender = 0,
    WaitForL1 = 1,
    WaitForL2 = 2,
  };

  struct Instance {
    ProcessId sender = 0;
    std::uint64_t next_p = 1;
    Phase phase = Phase::WaitForSender;
    std::optional<SenderValue> val;
    std::map<ProcessId, SignedCopy> checked_vals;
    std::map<ProcessId, L1Proof> checked_l1;
    bool l2_sent = false;
    std::set<std::uint64_t> conflicted;
    std::map<std::uint64_t, SenderValue> buffered_vals;
    std::map<std::uint64_t, std::vector<L2Proof>> buffered_l2;
    std::map<std::uint64_t, SwmrRoundDriver> rounds;
    std::map<std::uint64_t, Payload> delivered;
  };

  SrbMux() = default;
  SrbMux(SystemParams params, ProcessId self, std::set<ProcessId> senders);

  /// Sign and disseminate the next sequenced value as instance `self`.
  /// Returns the sequence number it was assigned.
  std::uint64_t broadcast(Ctx& ctx, const Payload& m);

  void on_message(Ctx&, ProcessId from, const Payload& bytes,
                  SrbDeliverHook& hook);
  void on_read(Ctx&, const Snapshot&, std::uint64_t token,
               SrbDeliverHook& hook);
  void on_append_applied(Ctx&, std::uint64_t round, SrbDeliverHook& hook);

  std::uint64_t my_seq() const { return my_seq_; }
  const Instance* instance(ProcessId sender) const;
  const std::map<std::uint64_t, Payload>& broadcast_log() const {
    return broadcast_log_;
  }

  void hash_state(Encoder&) const;
  void collect(ProcessId self, Observations&) const;

 private:
  Instance& inst(ProcessId sender) { return instances_.at(sender); }
  void handle_sender_value(Ctx&, Instance&, const SenderValue& sv,
                           SrbDeliverHook& hook);
  void accept_sender_value(Ctx&, Instance&, const SenderValue& sv);
  void note_conflict_evidence(Instance&, const SenderValue& sv);
  void handle_copy_found(Ctx&, Instance&, ProcessId source,
                         const Payload& bytes);
  void handle_l1_found(Ctx&, Instance&, ProcessId source,
                       const Payload& bytes);
  void try_compile_l1(Ctx&, Instance&);
  void try_compile_l2(Ctx&, Instance&);
  void maybe_deliver(Ctx&, Instance&, SrbDeliverHook& hook);
  bool round_hungry(const Instance&, std::uint64_t round_id) const;
  SwmrRoundDriver& round_for(Instance&, std::uint64_t round_id);

  SystemParams params_;
  ProcessId self_ = 0;
  std::set<ProcessId> senders_;
  std::map<ProcessId, Instance> instances_;
  std::uint64_t my_seq_ = 0;
  std::map<std::uint64_t, Payload> broadcast_log_;
};

/// Protocol node for a single-sender broadcast session: the sender issues
/// its scheduled broadcasts at start, every process runs the receiver side.
class SrbNode : public Machine, public SrbDeliverHook {
 public:
  SrbNode(SystemParams params, ProcessId self, ProcessId sender,
          std::vector<Payload> broadcasts);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void on_message(Ctx&, ProcessId from, const Payload& bytes) override;
  void on_read(Ctx&, const Snapshot&, std::uint64_t token) override;
  void on_append_applied(Ctx&, std::uint64_t round) override;
  void hash_state(Encoder&) const override;
  void collect(ProcessId self, Observations&) const override;

  const SrbMux& mux() const { return mux_; }

 private:
  ProcessId self_;
  ProcessId sender_;
  std::vector<Payload> broadcasts_;
  SrbMux mux_;
};

}  // namespace unilab

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "unilab/machine.hpp"
#include "unilab/messages.hpp"
#include "unilab/srb.hpp"
#include "unilab/types.hpp"
#include "unilab/util.hpp"

namespace unilab {

/// Byzantine behavior scripts. Each is an ordinary machine; the simulator
/// grants them no extra powers, so everything they do is something a real
/// faulty process could do: sign anything as themselves, send anything to
/// anyone, append anything to their own register, read and watch freely.

/// Sends and appends nothing, ever.
class SilentNode : public Machine {
 public:
  std::unique_ptr<Machine> clone() const override;
  void hash_state(Encoder&) const override;
};

/// Broadcast sender that signs one value but sends it to a chosen subset
/// of processes only.
class SrbPartialSenderNode : public Machine {
 public:
  SrbPartialSenderNode(SystemParams params, ProcessId self, Payload value,
                       std::vector<ProcessId> dests);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void hash_state(Encoder&) const override;

 private:
  SystemParams params_;
  ProcessId self_;
  Payload value_;
  std::vector<ProcessId> dests_;
};

/// Broadcast sender that signs two different values for the same sequence
/// number and plays them to disjoint audiences. It also plants signed
/// copies of both values in its own register and, once it harvests a
/// matching copy from some other register, compiles and plants a full
/// first-level proof, so honest processes get every ingredient a delivery
/// of either value could legitimately be built from.
class SrbEquivocatorNode : public Machine {
 public:
  SrbEquivocatorNode(SystemParams params, ProcessId self, Payload value_a,
                     Payload value_b, std::vector<ProcessId> dests_a,
                     std::vector<ProcessId> dests_b);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void on_read(Ctx&, const Snapshot&, std::uint64_t token) override;
  void hash_state(Encoder&) const override;

 private:
  void harvest(Ctx&, const Snapshot&);
  void try_plant_l1(Ctx&, bool for_a);

  SystemParams params_;
  ProcessId self_;
  Payload a_, b_;
  std::vector<ProcessId> dests_a_, dests_b_;
  SenderValue sva_, svb_;
  std::map<ProcessId, SignedCopy> copies_a_, copies_b_;
  bool planted_l1_a_ = false;
  bool planted_l1_b_ = false;
};

/// Trinket holder with the counter gate filed off: broadcasts attested
/// values with whatever counter the script says, increases or not. An
/// otherwise correct broadcast participant.
class CounterReplayNode : public Machine, public SrbDeliverHook {
 public:
  CounterReplayNode(SystemParams params, ProcessId self,
                    std::vector<std::pair<std::uint64_t, Payload>> schedule);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void on_message(Ctx&, ProcessId from, const Payload& bytes) override;
  void on_read(Ctx&, const Snapshot&, std::uint64_t token) override;
  void on_append_applied(Ctx&, std::uint64_t round) override;
  void on_srb_deliver(Ctx&, ProcessId, std::uint64_t, const Payload&) override;
  void hash_state(Encoder&) const override;

 private:
  SystemParams params_;
  ProcessId self_;
  std::vector<std::pair<std::uint64_t, Payload>> schedule_;
  SrbMux mux_;
};

/// Reactive noise source: for every message it receives it draws from a
/// seeded generator and either stays quiet, sends junk to a random
/// process, replays the message to a random process, or forwards it with
/// one byte flipped.
class ManglerNode : public Machine {
 public:
  ManglerNode(SystemParams params, ProcessId self, std::uint64_t seed);

  std::unique_ptr<Machine> clone() const override;
  void on_message(Ctx&, ProcessId from, const Payload& bytes) override;
  void hash_state(Encoder&) const override;

 private:
  SystemParams params_;
  ProcessId self_;
  SplitMix64 rng_;
};

/// Appends a scripted sequence of (round, value) entries to the own
/// register at start. With two different values under one round tag this
/// is the register-world equivocation: late readers see both, early
/// readers only the first.
class AppendScriptNode : public Machine {
 public:
  AppendScriptNode(SystemParams params, ProcessId self,
                   std::vector<std::pair<std::uint64_t, Payload>> script);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void hash_state(Encoder&) const override;

 private:
  SystemParams params_;
  ProcessId self_;
  std::vector<std::pair<std::uint64_t, Payload>> script_;
};

/// Broadcasts undecodable bytes on the sequenced channel.
class RbJunkNode : public Machine {
 public:
  RbJunkNode(SystemParams params, ProcessId self);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void hash_state(Encoder&) const override;

 private:
  SystemParams params_;
  ProcessId self_;
};

/// Sends a signed phase 1 round value to a subset only, over bare links.
class RbHalfNode : public Machine {
 public:
  RbHalfNode(SystemParams params, ProcessId self, Payload value,
             std::vector<ProcessId> dests);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void hash_state(Encoder&) const override;

 private:
  SystemParams params_;
  ProcessId self_;
  Payload value_;
  std::vector<ProcessId> dests_;
};

/// Signs two phase 1 round values and plays them to disjoint audiences
/// over bare links. Pointless against the sequenced channel (correct
/// processes drop bare sends there), which is the point.
class RbTwoFaceNode : public Machine {
 public:
  RbTwoFaceNode(SystemParams params, ProcessId self, Payload value_a,
                Payload value_b, std::vector<ProcessId> dests_a,
                std::vector<ProcessId> dests_b);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void hash_state(Encoder&) const override;

 private:
  SystemParams params_;
  ProcessId self_;
  Payload a_, b_;
  std::vector<ProcessId> dests_a_, dests_b_;
};

/// Instantiates a behavior by scenario name with key=value parameters.
/// Throws SemanticError for unknown names, unknown keys, or bad values.
std::unique_ptr<Machine> make_behavior(
    const std::string& name, const std::map<std::string, std::string>& kv,
    SystemParams params, ProcessId self);

/// Names accepted by make_behavior.
std::vector<std::string> behavior_names();

}  // namespace unilab

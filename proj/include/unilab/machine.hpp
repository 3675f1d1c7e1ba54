#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "unilab/codec.hpp"
#include "unilab/crypto.hpp"
#include "unilab/observations.hpp"
#include "unilab/registers.hpp"
#include "unilab/types.hpp"
#include "unilab/util.hpp"

namespace unilab {

class Simulation;

/// Register contents observed at one linearization point.
struct Snapshot {
  ProcessId owner = 0;
  std::vector<RegisterEntry> entries;
};

/// Capability handle passed to machine callbacks. Everything a process can
/// do to the outside world goes through here, which is what confines
/// Byzantine scripts: signing is bound to the caller's identity and appends
/// go to the caller's own register only.
class Ctx {
 public:
  Ctx(Simulation& sim, ProcessId self) : sim_(sim), self_(self) {}

  ProcessId self() const { return self_; }
  const SystemParams& params() const;

  Signature sign(ByteSpan body);
  bool verify(ProcessId signer, ByteSpan body, const Signature& sig) const;

  /// Read-only oracle access for structured validators. Signing still goes
  /// through sign(), which pins the caller identity.
  const SignatureOracle& oracle() const;

  /// Queue a message delivery (to == kAllProcesses: one per process,
  /// self included). Also records a send action in the trace.
  void send(ProcessId to, Payload bytes);

  /// Broadcast through the kernel's sequenced channel service: one delivery
  /// per process carrying (self, seq, bytes) with seq assigned by the
  /// kernel, so a sender physically cannot attach different payloads to the
  /// same sequence number.
  void rb_broadcast(Payload bytes);

  /// Append to own register; apply is a later linearization event.
  void append_own(std::uint64_t round, Payload payload);

  /// Read a register; the result snapshot arrives at a later event.
  void read_register(ProcessId owner, std::uint64_t token);

  /// One-shot subscription: fires a read once owner's log grows past
  /// seen_len (immediately if it already has).
  void watch_register(ProcessId owner, std::uint64_t seen_len,
                      std::uint64_t token);

  void record(TraceKind kind, ProcessId origin, ProcessId target,
              Payload payload);

  void crash();

 private:
  Simulation& sim_;
  ProcessId self_;
};

class Machine {
 public:
  virtual ~Machine() = default;
  virtual std::unique_ptr<Machine> clone() const = 0;

  virtual void on_start(Ctx&) {}
  virtual void on_message(Ctx&, ProcessId from, const Payload& bytes) {}
  virtual void on_rb_deliver(Ctx& ctx, ProcessId from, std::uint64_t seq,
                             const Payload& bytes) {}
  virtual void on_read(Ctx&, const Snapshot&, std::uint64_t token) {}
  virtual void on_append_applied(Ctx&, std::uint64_t round) {}

  /// Contribution to the canonical state hash. Must cover every field that
  /// influences future behavior and nothing history-dependent (no event
  /// ids, no trace positions).
  virtual void hash_state(Encoder&) const = 0;

  /// Protocol-level outcomes for property checking on terminal states.
  virtual void collect(ProcessId self, Observations&) const {}
};

}  // namespace unilab

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "unilab/crypto.hpp"
#include "unilab/event.hpp"
#include "unilab/machine.hpp"
#include "unilab/policy.hpp"
#include "unilab/registers.hpp"
#include "unilab/types.hpp"

namespace unilab {

/// Enabled-at index for events the policy holds past the horizon, and for
/// armed watches that have not fired.
inline constexpr std::uint64_t kNeverEnabled = ~0ull;

struct ObjOp {
  enum class Kind : std::uint8_t { None, Append, Read, Watch };
  Kind kind = Kind::None;
  std::uint64_t round = 0;   // Append
  Payload data;              // Append
  ProcessId reg_owner = 0;   // Read / Watch
  std::uint64_t seen_len = 0;  // Watch
  std::uint64_t token = 0;   // Read / Watch correlation, chosen by machine
};

struct PendingEvent {
  std::uint64_t seq = 0;
  TraceKind kind = TraceKind::Step;
  ProcessId origin = 0;
  ProcessId target = 0;
  Payload payload;
  ObjOp op;
  bool via_rb = false;
  std::uint64_t rb_seq = 0;
  std::uint64_t enabled_at = 0;
  bool held = false;             // policy: never dispatch
  std::uint64_t delay_floor = 0;  // watches: policy delay applied on wake
};

/// Deterministic discrete-event simulation of n processes exchanging
/// authenticated messages and operating on single-writer registers.
///
/// Scheduling: the dispatchable event with the smallest (enabled_at, seq)
/// runs next. enabled_at values are clamped to be non-decreasing along each
/// link (message link: sender/receiver pair; object link: one process's
/// operation stream), so links are FIFO by construction. Identical
/// (params, policy, machines) runs produce byte-identical traces.
///
/// The enumeration surface (enabled_fronts / dispatch_seq / state_hash /
/// clone) exposes exactly the schedule choices that can matter: the head of
/// each link queue. Everything behavior-relevant is covered by state_hash;
/// event sequence numbers are excluded, they only break ties.
class Simulation {
 public:
  Simulation(SystemParams params, DeliveryPolicy policy,
             std::vector<std::unique_ptr<Machine>> machines,
             std::set<ProcessId> byzantine);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  std::unique_ptr<Simulation> clone() const;

  /// Inject a message from outside any machine callback (test harness use).
  void inject_send(ProcessId from, ProcessId to, Payload bytes);

  /// Dispatch the next dispatchable event. nullopt: quiescent or horizon.
  std::optional<TraceEntry> step();

  const Trace& run_until_quiescent();

  bool quiescent() const;
  bool horizon_reached() const { return dispatched_ >= policy_.horizon; }

  /// True when the run was cut short: a delivery is held back by a link
  /// rule, or the event budget ran out with work remaining. Dormant watch
  /// subscriptions alone do not count; with no other event left the
  /// watched logs can never grow, so that state is a real endpoint.
  bool censored() const;

  // Enumeration surface.
  std::vector<std::uint64_t> enabled_fronts() const;
  std::optional<TraceKind> pending_kind(std::uint64_t seq) const;
  std::optional<TraceEntry> dispatch_seq(std::uint64_t seq);
  std::uint64_t state_hash() const { return state_hash128().first; }
  std::pair<std::uint64_t, std::uint64_t> state_hash128() const;
  void set_tracing(bool on) { tracing_ = on; }

  Machine& machine(ProcessId p) { return *machines_.at(p); }
  const Machine& machine(ProcessId p) const { return *machines_.at(p); }
  const SystemParams& params() const { return params_; }
  const DeliveryPolicy& policy() const { return policy_; }
  const std::set<ProcessId>& byzantine() const { return byzantine_; }
  const RegisterStore& registers() const { return registers_; }
  SignatureOracle& oracle() { return oracle_; }
  const SignatureOracle& oracle() const { return oracle_; }
  Trace& trace() { return trace_; }
  const Trace& trace() const { return trace_; }
  std::uint64_t dispatched() const { return dispatched_; }

  Observations collect() const;

 private:
  friend class Ctx;

  struct LinkKey {
    std::uint8_t cls = 0;  // 0 msg, 1 obj-op stream, 2 watch
    ProcessId a = 0;
    ProcessId b = 0;
    auto operator<=>(const LinkKey&) const = default;
  };

  struct CloneTag {};
  Simulation(CloneTag, const Simulation& other,
             std::vector<std::unique_ptr<Machine>> machines);

  static LinkKey link_of(const PendingEvent& ev);

  void issue_send(ProcessId from, ProcessId to, Payload bytes, bool via_rb,
                  std::uint64_t rb_seq);
  void issue_rb_broadcast(ProcessId from, Payload bytes);
  void issue_obj(ProcessId accessor, ObjOp op);
  TraceEntry dispatch(PendingEvent ev);
  void wake_watches(ProcessId owner);
  void record(TraceKind kind, ProcessId origin, ProcessId target,
              Payload payload);

  SystemParams params_;
  DeliveryPolicy policy_;
  std::vector<std::unique_ptr<Machine>> machines_;
  std::set<ProcessId> byzantine_;
  std::vector<bool> alive_;
  SignatureOracle oracle_;
  RegisterStore registers_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, PendingEvent> pending_;
  std::map<LinkKey, std::uint64_t> link_floor_;
  std::vector<std::uint64_t> rb_next_seq_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  bool tracing_ = true;
  Trace trace_;
};

}  // namespace unilab

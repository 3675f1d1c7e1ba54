#include "unilab/kernel.hpp"

#include <algorithm>

namespace unilab {

// ---------------------------------------------------------------- Ctx

const SystemParams& Ctx::params() const { return sim_.params_; }

Signature Ctx::sign(ByteSpan body) {
  return sim_.oracle_.sign(self_, self_, body);
}

bool Ctx::verify(ProcessId signer, ByteSpan body, const Signature& sig) const {
  return sim_.oracle_.verify(signer, body, sig);
}

const SignatureOracle& Ctx::oracle() const { return sim_.oracle_; }

void Ctx::send(ProcessId to, Payload bytes) {
  sim_.issue_send(self_, to, std::move(bytes), false, 0);
}

void Ctx::rb_broadcast(Payload bytes) {
  sim_.issue_rb_broadcast(self_, std::move(bytes));
}

void Ctx::append_own(std::uint64_t round, Payload payload) {
  ObjOp op;
  op.kind = ObjOp::Kind::Append;
  op.round = round;
  op.data = std::move(payload);
  op.reg_owner = self_;
  sim_.issue_obj(self_, std::move(op));
}

void Ctx::read_register(ProcessId owner, std::uint64_t token) {
  ObjOp op;
  op.kind = ObjOp::Kind::Read;
  op.reg_owner = owner;
  op.token = token;
  sim_.issue_obj(self_, std::move(op));
}

void Ctx::watch_register(ProcessId owner, std::uint64_t seen_len,
                         std::uint64_t token) {
  ObjOp op;
  op.kind = ObjOp::Kind::Watch;
  op.reg_owner = owner;
  op.seen_len = seen_len;
  op.token = token;
  sim_.issue_obj(self_, std::move(op));
}

void Ctx::record(TraceKind kind, ProcessId origin, ProcessId target,
                 Payload payload) {
  sim_.record(kind, origin, target, std::move(payload));
}

void Ctx::crash() { sim_.alive_[self_] = false; }

// --------------------------------------------------------- Simulation

Simulation::Simulation(SystemParams params, DeliveryPolicy policy,
                       std::vector<std::unique_ptr<Machine>> machines,
                       std::set<ProcessId> byzantine)
    : params_(params),
      policy_(std::move(policy)),
      machines_(std::move(machines)),
      byzantine_(std::move(byzantine)),
      alive_(params.n, true),
      registers_(params.n),
      rb_next_seq_(params.n, 1) {
  validate_byzantine_set(params_, byzantine_);
  if (machines_.size() != params_.n)
    throw InvalidParams("need exactly one machine per process");
  for (ProcessId p = 0; p < params_.n; ++p) {
    PendingEvent ev;
    ev.seq = next_seq_++;
    ev.kind = TraceKind::Step;
    ev.origin = p;
    ev.target = p;
    ev.enabled_at = 0;
    pending_.emplace(std::make_pair(ev.enabled_at, ev.seq), std::move(ev));
  }
}

Simulation::Simulation(CloneTag, const Simulation& o,
                       std::vector<std::unique_ptr<Machine>> machines)
    : params_(o.params_),
      policy_(o.policy_),
      machines_(std::move(machines)),
      byzantine_(o.byzantine_),
      alive_(o.alive_),
      oracle_(o.oracle_),
      registers_(o.registers_),
      pending_(o.pending_),
      link_floor_(o.link_floor_),
      rb_next_seq_(o.rb_next_seq_),
      next_seq_(o.next_seq_),
      dispatched_(o.dispatched_),
      tracing_(o.tracing_),
      trace_(o.trace_) {}

std::unique_ptr<Simulation> Simulation::clone() const {
  std::vector<std::unique_ptr<Machine>> ms;
  ms.reserve(machines_.size());
  for (const auto& m : machines_) ms.push_back(m->clone());
  return std::unique_ptr<Simulation>(
      new Simulation(CloneTag{}, *this, std::move(ms)));
}

Simulation::LinkKey Simulation::link_of(const PendingEvent& ev) {
  if (ev.kind == TraceKind::MsgDeliver)
    return LinkKey{0, ev.origin, ev.target};
  if (ev.kind == TraceKind::ObjApply && ev.op.kind == ObjOp::Kind::Watch)
    return LinkKey{2, ev.target, ev.op.reg_owner};
  if (ev.kind == TraceKind::ObjApply) return LinkKey{1, ev.target, 0};
  return LinkKey{3, ev.target, 0};  // process activation
}

void Simulation::inject_send(ProcessId from, ProcessId to, Payload bytes) {
  issue_send(from, to, std::move(bytes), false, 0);
}

void Simulation::issue_send(ProcessId from, ProcessId to, Payload bytes,
                            bool via_rb, std::uint64_t rb_seq) {
  if (from >= params_.n) throw InvalidParams("send: bad sender");
  if (to == kAllProcesses) {
    for (ProcessId p = 0; p < params_.n; ++p) {
      Payload copy = bytes;
      issue_send(from, p, std::move(copy), via_rb, rb_seq);
    }
    return;
  }
  if (to >= params_.n) throw InvalidParams("send: bad destination");
  record(TraceKind::ActSend, from, to, act_send_point_payload(bytes));

  PendingEvent ev;
  ev.seq = next_seq_++;
  ev.kind = TraceKind::MsgDeliver;
  ev.origin = from;
  ev.target = to;
  ev.payload = std::move(bytes);
  ev.via_rb = via_rb;
  ev.rb_seq = rb_seq;

  std::uint64_t base = dispatched_;
  if (policy_.delay_spread > 0) {
    SplitMix64 rng(fnv1a64_u64(ev.seq, fnv1a64_u64(policy_.seed, kFnvOffset)));
    base += rng.below(policy_.delay_spread + 1);
  }
  const LinkRule* rule = policy_.match(true, from, to);
  if (rule) {
    switch (rule->action) {
      case LinkRule::Action::DeliverNow:
        break;
      case LinkRule::Action::DelayUntil:
        base = std::max(base, rule->until);
        break;
      case LinkRule::Action::HoldPastHorizon:
        ev.held = true;
        break;
    }
  }
  ev.enabled_at = ev.held ? kNeverEnabled : base;

  LinkKey link = link_of(ev);
  auto [it, fresh] = link_floor_.try_emplace(link, ev.enabled_at);
  if (!fresh) {
    ev.enabled_at = std::max(ev.enabled_at, it->second);
    it->second = ev.enabled_at;
  }
  if (ev.enabled_at == kNeverEnabled) ev.held = true;
  pending_.emplace(std::make_pair(ev.enabled_at, ev.seq), std::move(ev));
}

void Simulation::issue_rb_broadcast(ProcessId from, Payload bytes) {
  std::uint64_t seq = rb_next_seq_.at(from)++;
  for (ProcessId p = 0; p < params_.n; ++p) {
    Payload copy = bytes;
    issue_send(from, p, std::move(copy), true, seq);
  }
}

void Simulation::issue_obj(ProcessId accessor, ObjOp op) {
  if (op.reg_owner >= params_.n) throw InvalidParams("register out of range");

  PendingEvent ev;
  ev.seq = next_seq_++;
  ev.kind = TraceKind::ObjApply;
  ev.origin = op.reg_owner;
  ev.target = accessor;
  ev.op = std::move(op);

  const LinkRule* rule = policy_.match(false, ev.op.reg_owner, accessor);
  std::uint64_t base = dispatched_;
  if (policy_.delay_spread > 0) {
    SplitMix64 rng(fnv1a64_u64(ev.seq, fnv1a64_u64(policy_.seed, kFnvOffset)));
    base += rng.below(policy_.delay_spread + 1);
  }
  std::uint64_t delay_floor = 0;
  bool held = false;
  if (rule) {
    switch (rule->action) {
      case LinkRule::Action::DeliverNow:
        break;
      case LinkRule::Action::DelayUntil:
        delay_floor = rule->until;
        break;
      case LinkRule::Action::HoldPastHorizon:
        held = true;
        break;
    }
  }

  if (ev.op.kind == ObjOp::Kind::Watch) {
    // Watches live outside any FIFO stream. Armed: dormant until the
    // watched log outgrows seen_len; if it already has, fire like a read.
    ev.held = held;
    ev.delay_floor = delay_floor;
    if (!held && registers_.log(ev.op.reg_owner).size() > ev.op.seen_len)
      ev.enabled_at = std::max(std::max(base, delay_floor), dispatched_);
    else
      ev.enabled_at = kNeverEnabled;
    pending_.emplace(std::make_pair(ev.enabled_at, ev.seq), std::move(ev));
    return;
  }

  ev.held = held;
  ev.enabled_at = held ? kNeverEnabled : std::max(base, delay_floor);

  LinkKey link = link_of(ev);
  auto [it, fresh] = link_floor_.try_emplace(link, ev.enabled_at);
  if (!fresh) {
    ev.enabled_at = std::max(ev.enabled_at, it->second);
    it->second = ev.enabled_at;
  }
  if (ev.enabled_at == kNeverEnabled) ev.held = true;
  pending_.emplace(std::make_pair(ev.enabled_at, ev.seq), std::move(ev));
}

void Simulation::wake_watches(ProcessId owner) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> to_wake;
  for (const auto& [key, ev] : pending_) {
    if (ev.kind != TraceKind::ObjApply || ev.op.kind != ObjOp::Kind::Watch)
      continue;
    if (ev.held || ev.enabled_at != kNeverEnabled) continue;
    if (ev.op.reg_owner != owner) continue;
    if (registers_.log(owner).size() > ev.op.seen_len) to_wake.push_back(key);
  }
  for (const auto& key : to_wake) {
    auto node = pending_.extract(key);
    PendingEvent ev = std::move(node.mapped());
    ev.enabled_at = std::max(dispatched_, ev.delay_floor);
    pending_.emplace(std::make_pair(ev.enabled_at, ev.seq), std::move(ev));
  }
}

void Simulation::record(TraceKind kind, ProcessId origin, ProcessId target,
                        Payload payload) {
  if (!tracing_) return;
  TraceEntry e;
  e.seq = trace_.entries.size();
  e.kind = kind;
  e.origin = origin;
  e.target = target;
  e.payload = std::move(payload);
  trace_.entries.push_back(std::move(e));
}

bool Simulation::censored() const {
  if (dispatched_ >= policy_.horizon && !pending_.empty()) return true;
  for (const auto& [key, ev] : pending_)
    if (ev.held) return true;
  return false;
}

std::optional<TraceEntry> Simulation::step() {
  if (dispatched_ >= policy_.horizon) {
    trace_.horizon_exceeded = censored();
    return std::nullopt;
  }
  auto it = pending_.begin();
  if (it == pending_.end() || it->second.enabled_at == kNeverEnabled) {
    trace_.horizon_exceeded = censored();
    return std::nullopt;
  }
  PendingEvent ev = std::move(it->second);
  pending_.erase(it);
  return dispatch(std::move(ev));
}

std::optional<TraceKind> Simulation::pending_kind(std::uint64_t seq) const {
  for (const auto& [key, ev] : pending_)
    if (ev.seq == seq) return ev.kind;
  return std::nullopt;
}

std::optional<TraceEntry> Simulation::dispatch_seq(std::uint64_t seq) {
  for (auto it = pending_.begin(); it != pending_.end(); ++it) {
    if (it->second.seq != seq) continue;
    if (it->second.enabled_at == kNeverEnabled) return std::nullopt;
    PendingEvent ev = std::move(it->second);
    pending_.erase(it);
    return dispatch(std::move(ev));
  }
  return std::nullopt;
}

TraceEntry Simulation::dispatch(PendingEvent ev) {
  dispatched_++;

  TraceEntry entry;
  entry.seq = trace_.entries.size();
  entry.kind = ev.kind;
  entry.origin = ev.origin;
  entry.target = ev.target;
  if (ev.kind == TraceKind::ObjApply) {
    Encoder enc;
    enc.put_u8(static_cast<std::uint8_t>(ev.op.kind));
    switch (ev.op.kind) {
      case ObjOp::Kind::Append:
        enc.put_u64(ev.op.round).put_bytes(ev.op.data);
        break;
      case ObjOp::Kind::Read:
      case ObjOp::Kind::Watch:
        enc.put_u32(ev.op.reg_owner);
        break;
      case ObjOp::Kind::None:
        break;
    }
    entry.payload = enc.take();
  } else if (ev.kind == TraceKind::MsgDeliver) {
    if (ev.via_rb)
      entry.payload = Encoder().put_u64(ev.rb_seq).put_bytes(ev.payload).take();
    else
      entry.payload = ev.payload;
  }
  if (tracing_) trace_.entries.push_back(entry);

  bool live = alive_.at(ev.target);
  Ctx ctx(*this, ev.target);
  switch (ev.kind) {
    case TraceKind::Step:
      if (live) machines_[ev.target]->on_start(ctx);
      break;
    case TraceKind::MsgDeliver:
      if (live) {
        if (ev.via_rb)
          machines_[ev.target]->on_rb_deliver(ctx, ev.origin, ev.rb_seq,
                                              ev.payload);
        else
          machines_[ev.target]->on_message(ctx, ev.origin, ev.payload);
      }
      break;
    case TraceKind::ObjApply:
      switch (ev.op.kind) {
        case ObjOp::Kind::Append:
          // The append linearizes even if its issuer crashed meanwhile.
          registers_.append(ev.target, ev.target, ev.op.round,
                            std::move(ev.op.data));
          wake_watches(ev.target);
          if (live) machines_[ev.target]->on_append_applied(ctx, ev.op.round);
          break;
        case ObjOp::Kind::Read:
        case ObjOp::Kind::Watch:
          if (live) {
            Snapshot snap;
            snap.owner = ev.op.reg_owner;
            snap.entries = registers_.log(ev.op.reg_owner);
            machines_[ev.target]->on_read(ctx, snap, ev.op.token);
          }
          break;
        case ObjOp::Kind::None:
          break;
      }
      break;
    default:
      break;
  }
  return entry;
}

const Trace& Simulation::run_until_quiescent() {
  while (step()) {
  }
  return trace_;
}

bool Simulation::quiescent() const {
  auto it = pending_.begin();
  return it == pending_.end() || it->second.enabled_at == kNeverEnabled;
}

std::vector<std::uint64_t> Simulation::enabled_fronts() const {
  std::vector<std::uint64_t> out;
  std::set<LinkKey> seen;
  for (const auto& [key, ev] : pending_) {
    if (!seen.insert(link_of(ev)).second) continue;
    if (ev.enabled_at == kNeverEnabled) continue;
    out.push_back(ev.seq);
  }
  return out;
}

std::pair<std::uint64_t, std::uint64_t> Simulation::state_hash128() const {
  Encoder enc;
  enc.put_u32(params_.n).put_u32(params_.t);
  for (bool a : alive_) enc.put_u8(a ? 1 : 0);
  for (std::uint64_t s : rb_next_seq_) enc.put_u64(s);
  for (const auto& m : machines_) m->hash_state(enc);
  registers_.hash_into(enc);
  enc.put_u64(oracle_.state_hash());

  std::map<LinkKey, std::vector<const PendingEvent*>> links;
  for (const auto& [key, ev] : pending_) links[link_of(ev)].push_back(&ev);
  for (const auto& [link, evs] : links) {
    enc.put_u8(link.cls).put_u32(link.a).put_u32(link.b);
    enc.put_u64(evs.size());
    for (const PendingEvent* ev : evs) {
      enc.put_u8(static_cast<std::uint8_t>(ev->kind));
      enc.put_u32(ev->origin).put_u32(ev->target);
      enc.put_bytes(ev->payload);
      enc.put_u8(static_cast<std::uint8_t>(ev->op.kind));
      enc.put_u64(ev->op.round).put_bytes(ev->op.data);
      enc.put_u32(ev->op.reg_owner).put_u64(ev->op.seen_len);
      enc.put_u64(ev->op.token);
      enc.put_u8(ev->via_rb ? 1 : 0).put_u64(ev->rb_seq);
      enc.put_u8(ev->held ? 1 : 0);
      enc.put_u8(ev->enabled_at == kNeverEnabled ? 1 : 0);
    }
  }
  std::uint64_t a = fnv1a64(enc.bytes());
  std::uint64_t b = fnv1a64(enc.bytes(), 0x6a09e667f3bcc908ull);
  return {a, b};
}

Observations Simulation::collect() const {
  Observations obs;
  obs.procs.resize(params_.n);
  for (ProcessId b : byzantine_) obs.procs[b].byzantine = true;
  obs.horizon_exceeded = censored();
  for (ProcessId p = 0; p < params_.n; ++p)
    machines_[p]->collect(p, obs);
  return obs;
}

}  // namespace unilab

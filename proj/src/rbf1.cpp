#include "unilab/rbf1.hpp"

namespace unilab {

namespace {
constexpr std::uint64_t kRound = 1;

std::uint64_t obs_round() { return round_id::plain(kRound); }
}  // namespace

RbF1Node::RbF1Node(SystemParams params, ProcessId self, Payload value,
                   bool plain_transport)
    : params_(params),
      self_(self),
      value_(std::move(value)),
      plain_transport_(plain_transport) {
  if (params_.n < 3) throw InvalidParams("two-phase round needs n >= 3");
}

std::unique_ptr<Machine> RbF1Node::clone() const {
  return std::make_unique<RbF1Node>(*this);
}

void RbF1Node::on_start(Ctx& ctx) {
  ctx.record(TraceKind::ActSend, self_, self_,
             act_send_round_payload(obs_round(), value_));
  RbF1Phase1 p1;
  p1.r = kRound;
  p1.v = value_;
  p1.sig = ctx.sign(RbF1Phase1::body(kRound, value_));
  Envelope env{MsgType::RbF1Phase1, 0, p1.encode()};
  if (plain_transport_)
    ctx.send(kAllProcesses, env.encode());
  else
    ctx.rb_broadcast(env.encode());
}

void RbF1Node::on_message(Ctx& ctx, ProcessId from, const Payload& bytes) {
  // Without the sequenced channel, bare sends are the round's transport.
  // With it, they are not part of the protocol and are dropped.
  if (plain_transport_) handle(ctx, from, bytes);
}

void RbF1Node::on_rb_deliver(Ctx& ctx, ProcessId from, std::uint64_t,
                             const Payload& bytes) {
  handle(ctx, from, bytes);
}

void RbF1Node::handle(Ctx& ctx, ProcessId from, const Payload& bytes) {
  auto env = Envelope::decode(bytes);
  if (!env) return;

  if (env->type == MsgType::RbF1Phase1) {
    auto p1 = RbF1Phase1::decode(env->inner);
    if (!p1 || p1->r != kRound) return;
    if (!ctx.verify(from, RbF1Phase1::body(p1->r, p1->v), p1->sig)) return;
    if (phase1_.count(from)) return;
    phase1_.emplace(from, std::make_pair(p1->v, p1->sig));
    add_received(ctx, from, p1->v, from);
    maybe_enter_phase2(ctx);
    return;
  }

  if (env->type == MsgType::RbF1Phase2) {
    auto p2 = RbF1Phase2::decode(env->inner);
    if (!p2 || p2->r != kRound) return;
    std::set<ProcessId> signers;
    for (const auto& ent : p2->entries) {
      if (ent.from >= params_.n) return;
      if (!signers.insert(ent.from).second) return;
      if (!ctx.verify(ent.from, RbF1Phase1::body(kRound, ent.v), ent.sig))
        return;
    }
    // A bundle vouches for its carrier only if at least two processes
    // contributed to it; a lone self-entry is just phase 1 again.
    if (signers.size() < 2) return;
    if (!phase2_senders_.insert(from).second) return;
    for (const auto& ent : p2->entries) add_received(ctx, ent.from, ent.v, from);
    maybe_finish(ctx);
  }
}

void RbF1Node::add_received(Ctx& ctx, ProcessId from, const Payload& v,
                            ProcessId via) {
  if (received_.count(from)) return;
  received_.emplace(from, v);
  recv_log_.push_back(Rcpt{from, v, via, !finished_});
  ctx.record(TraceKind::ActRecv, from, self_,
             act_recv_payload(obs_round(), from, v, via));
}

void RbF1Node::maybe_enter_phase2(Ctx& ctx) {
  if (phase_ != 1) return;
  if (phase1_.size() < params_.n - 1) return;
  phase_ = 2;
  RbF1Phase2 bundle;
  bundle.r = kRound;
  for (const auto& [p, vs] : phase1_)
    bundle.entries.push_back(RbF1Phase2::Entry{p, vs.first, vs.second});
  Envelope env{MsgType::RbF1Phase2, 0, bundle.encode()};
  if (plain_transport_)
    ctx.send(kAllProcesses, env.encode());
  else
    ctx.rb_broadcast(env.encode());
  // Bundles can arrive before the phase 1 quorum does; count them now.
  maybe_finish(ctx);
}

void RbF1Node::maybe_finish(Ctx& ctx) {
  if (finished_ || phase_ != 2) return;
  if (phase2_senders_.size() < params_.n - 1) return;
  finished_ = true;
  ctx.record(TraceKind::ActFinish, self_, self_,
             act_finish_payload(obs_round()));
}

void RbF1Node::hash_state(Encoder& enc) const {
  enc.put_u8(5);
  enc.put_u8(plain_transport_ ? 1 : 0);
  enc.put_u8(phase_);
  enc.put_u8(finished_ ? 1 : 0);
  enc.put_bytes(value_);
  enc.put_u32(static_cast<std::uint32_t>(phase1_.size()));
  for (const auto& [p, vs] : phase1_) {
    enc.put_u32(p);
    enc.put_bytes(vs.first);
    enc.put_u32(vs.second.signer);
    enc.put_u64(vs.second.tag);
  }
  enc.put_u32(static_cast<std::uint32_t>(phase2_senders_.size()));
  for (ProcessId p : phase2_senders_) enc.put_u32(p);
  enc.put_u32(static_cast<std::uint32_t>(recv_log_.size()));
  for (const auto& r : recv_log_) {
    enc.put_u32(r.from);
    enc.put_bytes(r.v);
    enc.put_u32(r.via);
    enc.put_u8(r.pre_finish ? 1 : 0);
  }
}

void RbF1Node::collect(ProcessId self, Observations& obs) const {
  RoundObs& r = obs.procs.at(self).rounds[obs_round()];
  r.sent = value_;
  r.finished = finished_;
  for (std::size_t i = 0; i < recv_log_.size(); ++i) {
    const Rcpt& c = recv_log_[i];
    if (c.pre_finish && finished_) r.finish_pos = i + 1;
    r.received.push_back(RoundObs::Recv{c.from, c.v, c.via, i, c.pre_finish});
  }
}

// ----------------------------------------------------------- NaiveRbNode

NaiveRbNode::NaiveRbNode(SystemParams params, ProcessId self, Payload value)
    : params_(params), self_(self), value_(std::move(value)) {}

std::unique_ptr<Machine> NaiveRbNode::clone() const {
  return std::make_unique<NaiveRbNode>(*this);
}

void NaiveRbNode::on_start(Ctx& ctx) {
  ctx.record(TraceKind::ActSend, self_, self_,
             act_send_round_payload(obs_round(), value_));
  NaiveRound msg;
  msg.r = kRound;
  msg.m = value_;
  Envelope env{MsgType::NaiveRound, 0, msg.encode()};
  ctx.rb_broadcast(env.encode());
}

void NaiveRbNode::on_rb_deliver(Ctx& ctx, ProcessId from, std::uint64_t,
                                const Payload& bytes) {
  auto env = Envelope::decode(bytes);
  if (!env || env->type != MsgType::NaiveRound) return;
  auto msg = NaiveRound::decode(env->inner);
  if (!msg || msg->r != kRound) return;
  if (received_.count(from)) return;
  received_.emplace(from, msg->m);
  recv_log_.push_back(Rcpt{from, msg->m, !finished_});
  ctx.record(TraceKind::ActRecv, from, self_,
             act_recv_payload(obs_round(), from, msg->m, from));
  if (!finished_ && received_.size() >= params_.n - params_.t) {
    finished_ = true;
    ctx.record(TraceKind::ActFinish, self_, self_,
               act_finish_payload(obs_round()));
  }
}

void NaiveRbNode::hash_state(Encoder& enc) const {
  enc.put_u8(6);
  enc.put_u8(finished_ ? 1 : 0);
  enc.put_bytes(value_);
  enc.put_u32(static_cast<std::uint32_t>(recv_log_.size()));
  for (const auto& r : recv_log_) {
    enc.put_u32(r.from);
    enc.put_bytes(r.v);
    enc.put_u8(r.pre_finish ? 1 : 0);
  }
}

void NaiveRbNode::collect(ProcessId self, Observations& obs) const {
  RoundObs& r = obs.procs.at(self).rounds[obs_round()];
  r.sent = value_;
  r.finished = finished_;
  for (std::size_t i = 0; i < recv_log_.size(); ++i) {
    const Rcpt& c = recv_log_[i];
    if (c.pre_finish && finished_) r.finish_pos = i + 1;
    r.received.push_back(RoundObs::Recv{c.from, c.v, c.from, i, c.pre_finish});
  }
}

}  // namespace unilab

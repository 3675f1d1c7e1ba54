#include "unilab/srb.hpp"

#include <algorithm>

namespace unilab {

namespace {

std::uint64_t copy_round(ProcessId sender, std::uint64_t k) {
  return round_id::make(sender, k, 1);
}
std::uint64_t l1_round(ProcessId sender, std::uint64_t k) {
  return round_id::make(sender, k, 2);
}

}  // namespace

SrbMux::SrbMux(SystemParams params, ProcessId self,
               std::set<ProcessId> senders)
    : params_(params), self_(self), senders_(std::move(senders)) {
  require_quorum_bound(params_, "sequenced broadcast");
  for (ProcessId s : senders_) {
    if (s >= params_.n) throw InvalidParams("sender id out of range");
    Instance inst;
    inst.sender = s;
    instances_.emplace(s, std::move(inst));
  }
}

std::uint64_t SrbMux::broadcast(Ctx& ctx, const Payload& m) {
  if (!senders_.contains(self_))
    throw NotSender("process " + std::to_string(self_) +
                    " is not a sender instance");
  my_seq_ += 1;
  SenderValue sv{self_, my_seq_, m, {}};
  sv.sig = ctx.sign(SenderValue::body(self_, my_seq_, m));
  broadcast_log_[my_seq_] = m;
  ctx.record(TraceKind::ActBroadcast, self_, self_,
             act_broadcast_payload(my_seq_, m));
  ctx.send(kAllProcesses,
           Envelope{MsgType::SenderValue, self_, sv.encode()}.encode());
  return my_seq_;
}

const SrbMux::Instance* SrbMux::instance(ProcessId sender) const {
  auto it = instances_.find(sender);
  return it == instances_.end() ? nullptr : &it->second;
}

SwmrRoundDriver& SrbMux::round_for(Instance& inst, std::uint64_t rid) {
  auto [it, fresh] =
      inst.rounds.try_emplace(rid, SwmrRoundDriver(params_.n, rid));
  return it->second;
}

void SrbMux::on_message(Ctx& ctx, ProcessId from, const Payload& bytes,
                        SrbDeliverHook& hook) {
  auto env = Envelope::decode(bytes);
  if (!env) return;
  auto it = instances_.find(env->instance);
  if (it == instances_.end()) return;
  Instance& inst = it->second;

  if (env->type == MsgType::SenderValue) {
    auto sv = SenderValue::decode(env->inner);
    if (!sv) return;
    // Sender values count only directly from their sender: a relayed or
    // replayed one could be stale, and the copy rounds relay values anyway.
    if (sv->sender != inst.sender || from != inst.sender) return;
    handle_sender_value(ctx, inst, *sv, hook);
    return;
  }
  if (env->type == MsgType::L2Proof) {
    auto proof = L2Proof::decode(env->inner);
    if (!proof) return;
    if (proof->k < inst.next_p) return;
    auto& bucket = inst.buffered_l2[proof->k];
    for (const auto& have : bucket)
      if (have == *proof) return;
    bucket.push_back(std::move(*proof));
    maybe_deliver(ctx, inst, hook);
    return;
  }
}

void SrbMux::handle_sender_value(Ctx& ctx, Instance& inst,
                                 const SenderValue& sv, SrbDeliverHook& hook) {
  if (!sv.valid(ctx.oracle())) return;
  if (sv.k < inst.next_p) return;
  if (sv.k > inst.next_p) {
    inst.buffered_vals.try_emplace(sv.k, sv);
    return;
  }
  if (inst.phase == Phase::WaitForSender) {
    accept_sender_value(ctx, inst, sv);
    maybe_deliver(ctx, inst, hook);
  } else {
    note_conflict_evidence(inst, sv);
  }
}

void SrbMux::accept_sender_value(Ctx& ctx, Instance& inst,
                                 const SenderValue& sv) {
  inst.val = sv;
  inst.phase = Phase::WaitForL1;
  SignedCopy copy{sv, self_, {}};
  copy.sig = ctx.sign(SignedCopy::body(sv));
  round_for(inst, copy_round(inst.sender, sv.k)).start(ctx, copy.encode());
}

void SrbMux::note_conflict_evidence(Instance& inst, const SenderValue& sv) {
  if (inst.val && sv.m != inst.val->m) inst.conflicted.insert(sv.k);
}

void SrbMux::on_append_applied(Ctx& ctx, std::uint64_t round,
                               SrbDeliverHook& hook) {
  ProcessId sender = round_id::instance_of(round);
  auto it = instances_.find(sender);
  if (it == instances_.end()) return;
  auto rit = it->second.rounds.find(round);
  if (rit == it->second.rounds.end()) return;
  rit->second.on_append_applied(ctx);
}

void SrbMux::on_read(Ctx& ctx, const Snapshot& snap, std::uint64_t token,
                     SrbDeliverHook& hook) {
  ProcessId sender = round_id::instance_of(token);
  auto it = instances_.find(sender);
  if (it == instances_.end()) return;
  Instance& inst = it->second;
  auto rit = inst.rounds.find(token);
  if (rit == inst.rounds.end()) return;

  auto outcome = rit->second.on_read(ctx, snap);
  std::uint8_t phase = round_id::phase_of(token);
  for (const auto& f : outcome.found) {
    ctx.record(TraceKind::ActRecv, f.from, self_,
               act_recv_payload(token, f.from, f.payload, f.from));
    if (phase == 1)
      handle_copy_found(ctx, inst, f.from, f.payload);
    else if (phase == 2)
      handle_l1_found(ctx, inst, f.from, f.payload);
  }
  if (outcome.just_finished)
    ctx.record(TraceKind::ActFinish, self_, self_, act_finish_payload(token));

  if (phase == 1)
    try_compile_l1(ctx, inst);
  else if (phase == 2)
    try_compile_l2(ctx, inst);

  // Re-find the driver: compiling may have inserted new rounds, but never
  // erases this one within this call.
  auto rit2 = inst.rounds.find(token);
  if (rit2 != inst.rounds.end())
    rit2->second.pump(ctx, round_hungry(inst, token));
  maybe_deliver(ctx, inst, hook);
}

bool SrbMux::round_hungry(const Instance& inst, std::uint64_t rid) const {
  std::uint64_t k = round_id::seq_of(rid);
  if (k != inst.next_p) return false;
  if (round_id::phase_of(rid) == 1) return inst.phase == Phase::WaitForL1;
  return inst.phase == Phase::WaitForL2 && !inst.l2_sent;
}

void SrbMux::handle_copy_found(Ctx& ctx, Instance& inst, ProcessId source,
                               const Payload& bytes) {
  auto copy = SignedCopy::decode(bytes);
  if (!copy) return;
  if (copy->copier != source) return;
  if (copy->val.sender != inst.sender) return;
  if (copy->val.k != inst.next_p) return;
  if (!copy->valid(ctx.oracle())) return;
  if (inst.phase != Phase::WaitForL1 || !inst.val) return;
  if (copy->val.m == inst.val->m) {
    inst.checked_vals.emplace(copy->copier, std::move(*copy));
  } else {
    // A validly signed different value for this sequence number: proof of
    // sender equivocation. Refuse to ever vouch for k with an L1 proof.
    inst.conflicted.insert(copy->val.k);
  }
}

void SrbMux::handle_l1_found(Ctx& ctx, Instance& inst, ProcessId source,
                             const Payload& bytes) {
  auto proof = L1Proof::decode(bytes);
  if (!proof) return;
  if (proof->compiler != source) return;
  if (inst.phase != Phase::WaitForL2 || !inst.val) return;
  if (proof->k != inst.next_p) return;
  if (!validate_l1(ctx.oracle(), *proof, inst.sender, proof->k,
                   inst.val->m, params_.t))
    return;
  inst.checked_l1.emplace(proof->compiler, std::move(*proof));
}

void SrbMux::try_compile_l1(Ctx& ctx, Instance& inst) {
  if (inst.phase != Phase::WaitForL1 || !inst.val) return;
  std::uint64_t k = inst.next_p;
  if (inst.conflicted.contains(k)) return;
  auto rit = inst.rounds.find(copy_round(inst.sender, k));
  if (rit == inst.rounds.end() || !rit->second.finished()) return;
  if (inst.checked_vals.size() < params_.t + 1) return;

  L1Proof l1{self_, k, inst.checked_vals, {}};
  l1.sig = ctx.sign(L1Proof::body(k, l1.copies));
  inst.phase = Phase::WaitForL2;
  round_for(inst, l1_round(inst.sender, k)).start(ctx, l1.encode());
}

void SrbMux::try_compile_l2(Ctx& ctx, Instance& inst) {
  if (inst.phase != Phase::WaitForL2 || inst.l2_sent) return;
  std::uint64_t k = inst.next_p;
  auto rit = inst.rounds.find(l1_round(inst.sender, k));
  if (rit == inst.rounds.end() || !rit->second.finished()) return;
  if (inst.checked_l1.size() < params_.t + 1) return;

  L2Proof l2{self_, k, inst.checked_l1, {}};
  l2.sig = ctx.sign(L2Proof::body(k, l2.proofs));
  inst.l2_sent = true;
  ctx.send(kAllProcesses,
           Envelope{MsgType::L2Proof, inst.sender, l2.encode()}.encode());
}

void SrbMux::maybe_deliver(Ctx& ctx, Instance& inst, SrbDeliverHook& hook) {
  for (;;) {
    std::uint64_t k = inst.next_p;
    bool progressed = false;

    auto it = inst.buffered_l2.find(k);
    if (it != inst.buffered_l2.end()) {
      for (const auto& proof : it->second) {
        auto m = validate_l2(ctx.oracle(), proof, inst.sender, k,
                             params_.t);
        if (!m) continue;
        // Forward the proof before advancing so every delivery also
        // propagates its justification. Our own compiled proof already
        // went out to everyone, so forwarding is only needed when the
        // justification arrived from outside.
        if (!inst.l2_sent)
          ctx.send(
              kAllProcesses,
              Envelope{MsgType::L2Proof, inst.sender, proof.encode()}.encode());
        ctx.record(TraceKind::ActDeliver, inst.sender, self_,
                   act_deliver_payload(inst.sender, k, *m));
        inst.delivered[k] = *m;
        hook.on_srb_deliver(ctx, inst.sender, k, *m);

        inst.val.reset();
        inst.checked_vals.clear();
        inst.checked_l1.clear();
        inst.l2_sent = false;
        inst.phase = Phase::WaitForSender;
        inst.rounds.erase(copy_round(inst.sender, k));
        inst.rounds.erase(l1_round(inst.sender, k));
        inst.buffered_l2.erase(k);
        inst.buffered_vals.erase(k);
        inst.next_p = k + 1;
        progressed = true;
        break;
      }
    }

    if (!progressed && inst.phase == Phase::WaitForSender) {
      auto bv = inst.buffered_vals.find(inst.next_p);
      if (bv != inst.buffered_vals.end()) {
        SenderValue sv = std::move(bv->second);
        inst.buffered_vals.erase(bv);
        accept_sender_value(ctx, inst, sv);
        progressed = true;
      }
    }

    if (!progressed) return;
  }
}

void SrbMux::hash_state(Encoder& enc) const {
  enc.put_u32(self_).put_u64(my_seq_);
  enc.put_u64(broadcast_log_.size());
  for (const auto& [k, m] : broadcast_log_) enc.put_u64(k).put_bytes(m);
  enc.put_u64(instances_.size());
  for (const auto& [s, inst] : instances_) {
    enc.put_u32(s).put_u64(inst.next_p);
    enc.put_u8(static_cast<std::uint8_t>(inst.phase));
    enc.put_u8(inst.val ? 1 : 0);
    if (inst.val) enc.put_bytes(inst.val->encode());
    enc.put_u64(inst.checked_vals.size());
    for (const auto& [p, c] : inst.checked_vals)
      enc.put_u32(p).put_bytes(c.encode());
    enc.put_u64(inst.checked_l1.size());
    for (const auto& [p, l1] : inst.checked_l1)
      enc.put_u32(p).put_bytes(l1.encode());
    enc.put_u8(inst.l2_sent ? 1 : 0);
    enc.put_u64(inst.conflicted.size());
    for (auto k : inst.conflicted) enc.put_u64(k);
    enc.put_u64(inst.buffered_vals.size());
    for (const auto& [k, sv] : inst.buffered_vals)
      enc.put_u64(k).put_bytes(sv.encode());
    enc.put_u64(inst.buffered_l2.size());
    for (const auto& [k, proofs] : inst.buffered_l2) {
      enc.put_u64(k).put_u64(proofs.size());
      for (const auto& p : proofs) enc.put_bytes(p.encode());
    }
    enc.put_u64(inst.rounds.size());
    for (const auto& [rid, driver] : inst.rounds) {
      enc.put_u64(rid);
      driver.hash_state(enc);
    }
    enc.put_u64(inst.delivered.size());
    for (const auto& [k, m] : inst.delivered) enc.put_u64(k).put_bytes(m);
  }
}

void SrbMux::collect(ProcessId self, Observations& obs) const {
  ProcObs& p = obs.procs.at(self);
  for (const auto& [k, m] : broadcast_log_) p.broadcasts[k] = m;
  for (const auto& [s, inst] : instances_) {
    for (const auto& [k, m] : inst.delivered)
      p.deliveries.push_back(DeliveryObs{s, k, m});
    for (const auto& [rid, driver] : inst.rounds)
      driver.collect(p.rounds[rid]);
  }
}

// ------------------------------------------------------------ SrbNode

SrbNode::SrbNode(SystemParams params, ProcessId self, ProcessId sender,
                 std::vector<Payload> broadcasts)
    : self_(self),
      sender_(sender),
      broadcasts_(std::move(broadcasts)),
      mux_(params, self, {sender}) {
  if (sender >= params.n) throw InvalidParams("sender id out of range");
}

std::unique_ptr<Machine> SrbNode::clone() const {
  return std::make_unique<SrbNode>(*this);
}

void SrbNode::on_start(Ctx& ctx) {
  if (self_ != sender_) return;
  for (const auto& m : broadcasts_) mux_.broadcast(ctx, m);
}

void SrbNode::on_message(Ctx& ctx, ProcessId from, const Payload& bytes) {
  mux_.on_message(ctx, from, bytes, *this);
}

void SrbNode::on_read(Ctx& ctx, const Snapshot& snap, std::uint64_t token) {
  mux_.on_read(ctx, snap, token, *this);
}

void SrbNode::on_append_applied(Ctx& ctx, std::uint64_t round) {
  mux_.on_append_applied(ctx, round, *this);
}

void SrbNode::hash_state(Encoder& enc) const {
  enc.put_u8(1);
  mux_.hash_state(enc);
}

void SrbNode::collect(ProcessId self, Observations& obs) const {
  mux_.collect(self, obs);
}

}  // namespace unilab

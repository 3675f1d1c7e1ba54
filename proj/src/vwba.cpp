#include "unilab/vwba.hpp"

namespace unilab {

std::optional<Payload> vwba_decide(const Payload& input,
                                   const std::vector<Payload>& received) {
  for (const auto& v : received)
    if (v != input) return std::nullopt;
  return input;
}

// -------------------------------------------------------- UniSwmrNode

UniSwmrNode::UniSwmrNode(SystemParams params, ProcessId self, Payload payload)
    : params_(params),
      self_(self),
      payload_(std::move(payload)),
      round_(params.n, round_id::plain(1)) {
  params_.validate();
}

std::unique_ptr<Machine> UniSwmrNode::clone() const {
  return std::make_unique<UniSwmrNode>(*this);
}

void UniSwmrNode::on_start(Ctx& ctx) { round_.start(ctx, payload_); }

void UniSwmrNode::on_append_applied(Ctx& ctx, std::uint64_t round) {
  if (round == round_.round()) round_.on_append_applied(ctx);
}

void UniSwmrNode::on_read(Ctx& ctx, const Snapshot& snap,
                          std::uint64_t token) {
  if (token != round_.round()) return;
  auto outcome = round_.on_read(ctx, snap);
  for (const auto& f : outcome.found)
    ctx.record(TraceKind::ActRecv, f.from, self_,
               act_recv_payload(token, f.from, f.payload, f.from));
  if (outcome.just_finished)
    ctx.record(TraceKind::ActFinish, self_, self_, act_finish_payload(token));
}

void UniSwmrNode::hash_state(Encoder& enc) const {
  enc.put_u8(2);
  round_.hash_state(enc);
}

void UniSwmrNode::collect(ProcessId self, Observations& obs) const {
  round_.collect(obs.procs.at(self).rounds[round_.round()]);
}

// ----------------------------------------------------------- VwbaNode

VwbaNode::VwbaNode(SystemParams params, ProcessId self, Payload input)
    : params_(params),
      self_(self),
      input_(std::move(input)),
      round_(params.n, round_id::plain(1)) {
  params_.validate();
}

std::unique_ptr<Machine> VwbaNode::clone() const {
  return std::make_unique<VwbaNode>(*this);
}

void VwbaNode::on_start(Ctx& ctx) { round_.start(ctx, input_); }

void VwbaNode::on_append_applied(Ctx& ctx, std::uint64_t round) {
  if (round == round_.round()) round_.on_append_applied(ctx);
}

void VwbaNode::on_read(Ctx& ctx, const Snapshot& snap, std::uint64_t token) {
  if (token != round_.round()) return;
  auto outcome = round_.on_read(ctx, snap);
  for (const auto& f : outcome.found)
    ctx.record(TraceKind::ActRecv, f.from, self_,
               act_recv_payload(token, f.from, f.payload, f.from));
  if (outcome.just_finished) {
    ctx.record(TraceKind::ActFinish, self_, self_, act_finish_payload(token));
    maybe_decide(ctx);
  }
}

void VwbaNode::maybe_decide(Ctx& ctx) {
  if (decided_) return;
  decided_ = true;
  std::vector<Payload> values;
  for (const auto& [from, vals] : round_.received())
    for (const auto& v : vals) values.push_back(v);
  decision_ = vwba_decide(input_, values);
  ctx.record(TraceKind::ActDecide, self_, self_,
             act_decide_payload(!decision_.has_value(),
                                decision_ ? *decision_ : Payload{}));
}

void VwbaNode::hash_state(Encoder& enc) const {
  enc.put_u8(3);
  enc.put_bytes(input_);
  round_.hash_state(enc);
  enc.put_u8(decided_ ? 1 : 0);
  enc.put_u8(decision_ ? 1 : 0);
  if (decision_) enc.put_bytes(*decision_);
}

void VwbaNode::collect(ProcessId self, Observations& obs) const {
  ProcObs& p = obs.procs.at(self);
  round_.collect(p.rounds[round_.round()]);
  p.decided = decided_;
  p.decision = decision_;
}

}  // namespace unilab

#include "unilab/trinc.hpp"

#include "unilab/codec.hpp"

namespace unilab {

Payload trinc_value_encode(std::uint64_t c, ByteSpan m) {
  return Encoder().put_u64(c).put_bytes(m).take();
}

std::optional<std::pair<std::uint64_t, Payload>> trinc_value_decode(
    ByteSpan bytes) {
  Decoder dec(bytes);
  auto c = dec.take_u64();
  auto m = dec.take_bytes();
  if (!c || !m || !dec.done()) return std::nullopt;
  return std::make_pair(*c, std::move(*m));
}

namespace {

std::set<ProcessId> all_senders(std::uint32_t n) {
  std::set<ProcessId> out;
  for (ProcessId p = 0; p < n; ++p) out.insert(p);
  return out;
}

}  // namespace

TrincNode::TrincNode(SystemParams params, ProcessId self,
                     std::vector<std::pair<std::uint64_t, Payload>> schedule)
    : params_(params),
      self_(self),
      schedule_(std::move(schedule)),
      mux_(params, self, all_senders(params.n)) {}

std::unique_ptr<Machine> TrincNode::clone() const {
  return std::make_unique<TrincNode>(*this);
}

void TrincNode::on_start(Ctx& ctx) {
  for (const auto& [c, m] : schedule_) attest(ctx, c, m);
}

std::optional<Attestation> TrincNode::attest(Ctx& ctx, std::uint64_t c,
                                             const Payload& m) {
  if (c <= last_c_) return std::nullopt;
  last_c_ = c;
  std::uint64_t k = mux_.broadcast(ctx, trinc_value_encode(c, m));
  Attestation a{self_, k, c, m};
  issued_.push_back(a);
  ctx.record(TraceKind::ActAttest, self_, self_, act_attest_payload(k, c, m));
  return a;
}

bool TrincNode::check_attestation(const Attestation& a) const {
  auto qit = stored_.find(a.q);
  if (qit == stored_.end()) return false;
  auto cit = qit->second.find(a.c);
  if (cit == qit->second.end()) return false;
  return cit->second.first == a.k && cit->second.second == a.m;
}

void TrincNode::on_srb_deliver(Ctx&, ProcessId sender, std::uint64_t k,
                               const Payload& m) {
  auto value = trinc_value_decode(m);
  if (!value) return;
  auto [c, inner] = std::move(*value);
  auto hit = highest_.find(sender);
  std::uint64_t have = hit == highest_.end() ? 0 : hit->second;
  // Store only counter increases; a replayed or reordered counter value is
  // rejected, which is exactly what makes one counter value bind at most
  // one message per holder at this verifier.
  if (c <= have) return;
  highest_[sender] = c;
  stored_[sender].emplace(c, std::make_pair(k, std::move(inner)));
}

void TrincNode::on_message(Ctx& ctx, ProcessId from, const Payload& bytes) {
  mux_.on_message(ctx, from, bytes, *this);
}

void TrincNode::on_read(Ctx& ctx, const Snapshot& snap, std::uint64_t token) {
  mux_.on_read(ctx, snap, token, *this);
}

void TrincNode::on_append_applied(Ctx& ctx, std::uint64_t round) {
  mux_.on_append_applied(ctx, round, *this);
}

void TrincNode::hash_state(Encoder& enc) const {
  enc.put_u8(4);
  mux_.hash_state(enc);
  enc.put_u64(last_c_);
  enc.put_u64(issued_.size());
  for (const auto& a : issued_)
    enc.put_u64(a.k).put_u64(a.c).put_bytes(a.m);
  enc.put_u64(stored_.size());
  for (const auto& [q, by_c] : stored_) {
    enc.put_u32(q).put_u64(by_c.size());
    for (const auto& [c, km] : by_c)
      enc.put_u64(c).put_u64(km.first).put_bytes(km.second);
  }
}

void TrincNode::collect(ProcessId self, Observations& obs) const {
  mux_.collect(self, obs);
  ProcObs& p = obs.procs.at(self);
  for (const auto& a : issued_) p.attests.push_back(AttestObs{a.k, a.c, a.m});
}

}  // namespace unilab

#include "unilab/messages.hpp"

namespace unilab {

namespace {

// Domain separation tags for signed bodies.
enum class BodyTag : std::uint8_t {
  SenderValue = 1,
  Copy = 2,
  L1 = 3,
  L2 = 4,
  Phase1 = 5,
};

void put_sig(Encoder& enc, const Signature& sig) {
  enc.put_u32(sig.signer).put_u64(sig.tag);
}

std::optional<Signature> take_sig(Decoder& dec) {
  auto signer = dec.take_u32();
  auto tag = dec.take_u64();
  if (!signer || !tag) return std::nullopt;
  return Signature{*signer, *tag};
}

}  // namespace

// ----------------------------------------------------------- Envelope

Payload Envelope::encode() const {
  return Encoder()
      .put_u8(static_cast<std::uint8_t>(type))
      .put_u32(instance)
      .put_bytes(inner)
      .take();
}

std::optional<Envelope> Envelope::decode(ByteSpan bytes) {
  Decoder dec(bytes);
  auto type = dec.take_u8();
  auto instance = dec.take_u32();
  auto inner = dec.take_bytes();
  if (!type || !instance || !inner || !dec.done()) return std::nullopt;
  if (*type < 1 || *type > 5) return std::nullopt;
  return Envelope{static_cast<MsgType>(*type), *instance, std::move(*inner)};
}

// -------------------------------------------------------- SenderValue

Payload SenderValue::body(ProcessId sender, std::uint64_t k, ByteSpan m) {
  return Encoder()
      .put_u8(static_cast<std::uint8_t>(BodyTag::SenderValue))
      .put_u32(sender)
      .put_u64(k)
      .put_bytes(m)
      .take();
}

Payload SenderValue::encode() const {
  Encoder enc;
  enc.put_u32(sender).put_u64(k).put_bytes(m);
  put_sig(enc, sig);
  return enc.take();
}

std::optional<SenderValue> SenderValue::decode(ByteSpan bytes) {
  Decoder dec(bytes);
  auto sender = dec.take_u32();
  auto k = dec.take_u64();
  auto m = dec.take_bytes();
  auto sig = take_sig(dec);
  if (!sender || !k || !m || !sig || !dec.done()) return std::nullopt;
  return SenderValue{*sender, *k, std::move(*m), *sig};
}

// --------------------------------------------------------- SignedCopy

Payload SignedCopy::body(const SenderValue& val) {
  return Encoder()
      .put_u8(static_cast<std::uint8_t>(BodyTag::Copy))
      .put_bytes(val.encode())
      .take();
}

Payload SignedCopy::encode() const {
  Encoder enc;
  enc.put_bytes(val.encode()).put_u32(copier);
  put_sig(enc, sig);
  return enc.take();
}

std::optional<SignedCopy> SignedCopy::decode(ByteSpan bytes) {
  Decoder dec(bytes);
  auto val_bytes = dec.take_bytes();
  auto copier = dec.take_u32();
  auto sig = take_sig(dec);
  if (!val_bytes || !copier || !sig || !dec.done()) return std::nullopt;
  auto val = SenderValue::decode(*val_bytes);
  if (!val) return std::nullopt;
  return SignedCopy{std::move(*val), *copier, *sig};
}

// ------------------------------------------------------------ L1Proof

Payload L1Proof::body(std::uint64_t k,
                      const std::map<ProcessId, SignedCopy>& copies) {
  Encoder enc;
  enc.put_u8(static_cast<std::uint8_t>(BodyTag::L1)).put_u64(k);
  enc.put_u64(copies.size());
  for (const auto& [p, c] : copies) enc.put_u32(p).put_bytes(c.encode());
  return enc.take();
}

Payload L1Proof::encode() const {
  Encoder enc;
  enc.put_u32(compiler).put_u64(k);
  enc.put_u64(copies.size());
  for (const auto& [p, c] : copies) enc.put_u32(p).put_bytes(c.encode());
  put_sig(enc, sig);
  return enc.take();
}

std::optional<L1Proof> L1Proof::decode(ByteSpan bytes) {
  Decoder dec(bytes);
  auto compiler = dec.take_u32();
  auto k = dec.take_u64();
  auto count = dec.take_u64();
  if (!compiler || !k || !count || *count > 4096) return std::nullopt;
  L1Proof out;
  out.compiler = *compiler;
  out.k = *k;
  for (std::uint64_t i = 0; i < *count; ++i) {
    auto p = dec.take_u32();
    auto copy_bytes = dec.take_bytes();
    if (!p || !copy_bytes) return std::nullopt;
    auto copy = SignedCopy::decode(*copy_bytes);
    if (!copy) return std::nullopt;
    out.copies.emplace(*p, std::move(*copy));
  }
  auto sig = take_sig(dec);
  if (!sig || !dec.done()) return std::nullopt;
  out.sig = *sig;
  return out;
}

// ------------------------------------------------------------ L2Proof

Payload L2Proof::body(std::uint64_t k,
                      const std::map<ProcessId, L1Proof>& proofs) {
  Encoder enc;
  enc.put_u8(static_cast<std::uint8_t>(BodyTag::L2)).put_u64(k);
  enc.put_u64(proofs.size());
  for (const auto& [p, l1] : proofs) enc.put_u32(p).put_bytes(l1.encode());
  return enc.take();
}

Payload L2Proof::encode() const {
  Encoder enc;
  enc.put_u32(compiler).put_u64(k);
  enc.put_u64(proofs.size());
  for (const auto& [p, l1] : proofs) enc.put_u32(p).put_bytes(l1.encode());
  put_sig(enc, sig);
  return enc.take();
}

std::optional<L2Proof> L2Proof::decode(ByteSpan bytes) {
  Decoder dec(bytes);
  auto compiler = dec.take_u32();
  auto k = dec.take_u64();
  auto count = dec.take_u64();
  if (!compiler || !k || !count || *count > 4096) return std::nullopt;
  L2Proof out;
  out.compiler = *compiler;
  out.k = *k;
  for (std::uint64_t i = 0; i < *count; ++i) {
    auto p = dec.take_u32();
    auto l1_bytes = dec.take_bytes();
    if (!p || !l1_bytes) return std::nullopt;
    auto l1 = L1Proof::decode(*l1_bytes);
    if (!l1) return std::nullopt;
    out.proofs.emplace(*p, std::move(*l1));
  }
  auto sig = take_sig(dec);
  if (!sig || !dec.done()) return std::nullopt;
  out.sig = *sig;
  return out;
}

// --------------------------------------------------------- validators

bool validate_copy(const SignatureOracle& oracle, const SignedCopy& copy,
                   ProcessId sender, std::uint64_t k, const Payload& val_m) {
  return copy.val.sender == sender && copy.val.k == k && copy.val.m == val_m &&
         copy.valid(oracle);
}

bool validate_l1(const SignatureOracle& oracle, const L1Proof& proof,
                 ProcessId sender, std::uint64_t k, const Payload& val_m,
                 std::uint32_t t) {
  if (proof.k != k) return false;
  if (proof.copies.size() < t + 1) return false;
  for (const auto& [p, copy] : proof.copies) {
    if (copy.copier != p) return false;
    if (!validate_copy(oracle, copy, sender, k, val_m)) return false;
  }
  return oracle.verify(proof.compiler, L1Proof::body(k, proof.copies),
                       proof.sig);
}

std::optional<Payload> validate_l2(const SignatureOracle& oracle,
                                   const L2Proof& proof, ProcessId sender,
                                   std::uint64_t k, std::uint32_t t) {
  if (proof.k != k) return std::nullopt;
  if (proof.proofs.size() < t + 1) return std::nullopt;
  const Payload* m = nullptr;
  for (const auto& [p, l1] : proof.proofs) {
    if (l1.compiler != p) return std::nullopt;
    if (l1.copies.empty()) return std::nullopt;
    if (!m) m = &l1.copies.begin()->second.val.m;
    if (!validate_l1(oracle, l1, sender, k, *m, t)) return std::nullopt;
  }
  return *m;
}

// --------------------------------------------------------- round wire

Payload RbF1Phase1::body(std::uint64_t r, ByteSpan v) {
  return Encoder()
      .put_u8(static_cast<std::uint8_t>(BodyTag::Phase1))
      .put_u64(r)
      .put_bytes(v)
      .take();
}

Payload RbF1Phase1::encode() const {
  Encoder enc;
  enc.put_u64(r).put_bytes(v);
  put_sig(enc, sig);
  return enc.take();
}

std::optional<RbF1Phase1> RbF1Phase1::decode(ByteSpan bytes) {
  Decoder dec(bytes);
  auto r = dec.take_u64();
  auto v = dec.take_bytes();
  auto sig = take_sig(dec);
  if (!r || !v || !sig || !dec.done()) return std::nullopt;
  return RbF1Phase1{*r, std::move(*v), *sig};
}

Payload RbF1Phase2::encode() const {
  Encoder enc;
  enc.put_u64(r).put_u64(entries.size());
  for (const auto& e : entries) {
    enc.put_u32(e.from).put_bytes(e.v);
    put_sig(enc, e.sig);
  }
  return enc.take();
}

std::optional<RbF1Phase2> RbF1Phase2::decode(ByteSpan bytes) {
  Decoder dec(bytes);
  auto r = dec.take_u64();
  auto count = dec.take_u64();
  if (!r || !count || *count > 4096) return std::nullopt;
  RbF1Phase2 out;
  out.r = *r;
  for (std::uint64_t i = 0; i < *count; ++i) {
    auto from = dec.take_u32();
    auto v = dec.take_bytes();
    auto sig = take_sig(dec);
    if (!from || !v || !sig) return std::nullopt;
    out.entries.push_back(Entry{*from, std::move(*v), *sig});
  }
  if (!dec.done()) return std::nullopt;
  return out;
}

Payload NaiveRound::encode() const {
  return Encoder().put_u64(r).put_bytes(m).take();
}

std::optional<NaiveRound> NaiveRound::decode(ByteSpan bytes) {
  Decoder dec(bytes);
  auto r = dec.take_u64();
  auto m = dec.take_bytes();
  if (!r || !m || !dec.done()) return std::nullopt;
  return NaiveRound{*r, std::move(*m)};
}

}  // namespace unilab

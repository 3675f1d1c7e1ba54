#include "unilab/behaviors.hpp"

#include <algorithm>

#include "unilab/trinc.hpp"

namespace unilab {

namespace {

std::uint64_t copy_round(ProcessId sender, std::uint64_t k) {
  return round_id::make(sender, k, 1);
}
std::uint64_t l1_round(ProcessId sender, std::uint64_t k) {
  return round_id::make(sender, k, 2);
}

}  // namespace

// ----------------------------------------------------------- SilentNode

std::unique_ptr<Machine> SilentNode::clone() const {
  return std::make_unique<SilentNode>(*this);
}

void SilentNode::hash_state(Encoder& enc) const { enc.put_u8(32); }

// ------------------------------------------------- SrbPartialSenderNode

SrbPartialSenderNode::SrbPartialSenderNode(SystemParams params, ProcessId self,
                                           Payload value,
                                           std::vector<ProcessId> dests)
    : params_(params),
      self_(self),
      value_(std::move(value)),
      dests_(std::move(dests)) {}

std::unique_ptr<Machine> SrbPartialSenderNode::clone() const {
  return std::make_unique<SrbPartialSenderNode>(*this);
}

void SrbPartialSenderNode::on_start(Ctx& ctx) {
  SenderValue sv;
  sv.sender = self_;
  sv.k = 1;
  sv.m = value_;
  sv.sig = ctx.sign(SenderValue::body(self_, 1, value_));
  Envelope env{MsgType::SenderValue, self_, sv.encode()};
  for (ProcessId d : dests_) ctx.send(d, env.encode());
}

void SrbPartialSenderNode::hash_state(Encoder& enc) const {
  enc.put_u8(33);
  enc.put_bytes(value_);
  for (ProcessId d : dests_) enc.put_u32(d);
}

// --------------------------------------------------- SrbEquivocatorNode

SrbEquivocatorNode::SrbEquivocatorNode(SystemParams params, ProcessId self,
                                       Payload value_a, Payload value_b,
                                       std::vector<ProcessId> dests_a,
                                       std::vector<ProcessId> dests_b)
    : params_(params),
      self_(self),
      a_(std::move(value_a)),
      b_(std::move(value_b)),
      dests_a_(std::move(dests_a)),
      dests_b_(std::move(dests_b)) {}

std::unique_ptr<Machine> SrbEquivocatorNode::clone() const {
  return std::make_unique<SrbEquivocatorNode>(*this);
}

void SrbEquivocatorNode::on_start(Ctx& ctx) {
  sva_ = SenderValue{self_, 1, a_, ctx.sign(SenderValue::body(self_, 1, a_))};
  svb_ = SenderValue{self_, 1, b_, ctx.sign(SenderValue::body(self_, 1, b_))};
  Envelope env_a{MsgType::SenderValue, self_, sva_.encode()};
  Envelope env_b{MsgType::SenderValue, self_, svb_.encode()};
  for (ProcessId d : dests_a_) ctx.send(d, env_a.encode());
  for (ProcessId d : dests_b_) ctx.send(d, env_b.encode());

  SignedCopy ca{sva_, self_, ctx.sign(SignedCopy::body(sva_))};
  SignedCopy cb{svb_, self_, ctx.sign(SignedCopy::body(svb_))};
  copies_a_.emplace(self_, ca);
  copies_b_.emplace(self_, cb);
  ctx.append_own(copy_round(self_, 1), ca.encode());
  ctx.append_own(copy_round(self_, 1), cb.encode());
  for (ProcessId p = 0; p < params_.n; ++p)
    if (p != self_) ctx.watch_register(p, 0, copy_round(self_, 1));
}

void SrbEquivocatorNode::on_read(Ctx& ctx, const Snapshot& snap,
                                 std::uint64_t token) {
  if (token != copy_round(self_, 1)) return;
  harvest(ctx, snap);
  try_plant_l1(ctx, true);
  try_plant_l1(ctx, false);
  if (!(planted_l1_a_ && planted_l1_b_) && snap.owner != self_)
    ctx.watch_register(snap.owner, snap.entries.size(), copy_round(self_, 1));
}

void SrbEquivocatorNode::harvest(Ctx& ctx, const Snapshot& snap) {
  for (const auto& entry : snap.entries) {
    if (entry.round != copy_round(self_, 1)) continue;
    auto copy = SignedCopy::decode(entry.payload);
    if (!copy || copy->copier != snap.owner) continue;
    if (!copy->valid(ctx.oracle())) continue;
    if (copy->val.sender != self_ || copy->val.k != 1) continue;
    if (copy->val.m == a_)
      copies_a_.emplace(copy->copier, *copy);
    else if (copy->val.m == b_)
      copies_b_.emplace(copy->copier, *copy);
  }
}

void SrbEquivocatorNode::try_plant_l1(Ctx& ctx, bool for_a) {
  bool& planted = for_a ? planted_l1_a_ : planted_l1_b_;
  const auto& copies = for_a ? copies_a_ : copies_b_;
  if (planted || copies.size() < params_.t + 1) return;
  L1Proof l1;
  l1.compiler = self_;
  l1.k = 1;
  for (const auto& [p, c] : copies) {
    if (l1.copies.size() == params_.t + 1) break;
    l1.copies.emplace(p, c);
  }
  l1.sig = ctx.sign(L1Proof::body(1, l1.copies));
  ctx.append_own(l1_round(self_, 1), l1.encode());
  planted = true;
}

void SrbEquivocatorNode::hash_state(Encoder& enc) const {
  enc.put_u8(34);
  enc.put_bytes(a_).put_bytes(b_);
  auto put_sv = [&](const SenderValue& sv) {
    enc.put_u32(sv.sender).put_u64(sv.k).put_bytes(sv.m);
    enc.put_u32(sv.sig.signer).put_u64(sv.sig.tag);
  };
  put_sv(sva_);
  put_sv(svb_);
  auto put_copies = [&](const std::map<ProcessId, SignedCopy>& m) {
    enc.put_u64(m.size());
    for (const auto& [p, c] : m) {
      enc.put_u32(p);
      enc.put_u32(c.sig.signer).put_u64(c.sig.tag);
    }
  };
  put_copies(copies_a_);
  put_copies(copies_b_);
  enc.put_u8(planted_l1_a_ ? 1 : 0).put_u8(planted_l1_b_ ? 1 : 0);
}

// ----------------------------------------------------- CounterReplayNode

namespace {
std::set<ProcessId> everyone(std::uint32_t n) {
  std::set<ProcessId> out;
  for (ProcessId p = 0; p < n; ++p) out.insert(p);
  return out;
}
}  // namespace

CounterReplayNode::CounterReplayNode(
    SystemParams params, ProcessId self,
    std::vector<std::pair<std::uint64_t, Payload>> schedule)
    : params_(params),
      self_(self),
      schedule_(std::move(schedule)),
      mux_(params, self, everyone(params.n)) {}

std::unique_ptr<Machine> CounterReplayNode::clone() const {
  return std::make_unique<CounterReplayNode>(*this);
}

void CounterReplayNode::on_start(Ctx& ctx) {
  for (const auto& [c, m] : schedule_)
    mux_.broadcast(ctx, trinc_value_encode(c, m));
}

void CounterReplayNode::on_message(Ctx& ctx, ProcessId from,
                                   const Payload& bytes) {
  mux_.on_message(ctx, from, bytes, *this);
}

void CounterReplayNode::on_read(Ctx& ctx, const Snapshot& snap,
                                std::uint64_t token) {
  mux_.on_read(ctx, snap, token, *this);
}

void CounterReplayNode::on_append_applied(Ctx& ctx, std::uint64_t round) {
  mux_.on_append_applied(ctx, round, *this);
}

void CounterReplayNode::on_srb_deliver(Ctx&, ProcessId, std::uint64_t,
                                       const Payload&) {}

void CounterReplayNode::hash_state(Encoder& enc) const {
  enc.put_u8(35);
  mux_.hash_state(enc);
}

// ----------------------------------------------------------- ManglerNode

ManglerNode::ManglerNode(SystemParams params, ProcessId self,
                         std::uint64_t seed)
    : params_(params), self_(self), rng_(seed) {}

std::unique_ptr<Machine> ManglerNode::clone() const {
  return std::make_unique<ManglerNode>(*this);
}

void ManglerNode::on_message(Ctx& ctx, ProcessId, const Payload& bytes) {
  std::uint64_t action = rng_.below(4);
  ProcessId target = static_cast<ProcessId>(rng_.below(params_.n));
  switch (action) {
    case 0:
      break;
    case 1: {
      Payload junk;
      for (int i = 0; i < 4; ++i)
        junk.push_back(static_cast<Byte>(rng_.below(256)));
      ctx.send(target, std::move(junk));
      break;
    }
    case 2: {
      if (bytes.empty()) break;
      Payload mutated = bytes;
      std::size_t pos = static_cast<std::size_t>(rng_.below(mutated.size()));
      mutated[pos] = static_cast<Byte>(mutated[pos] ^
                                       (1 + rng_.below(255)));
      ctx.send(target, std::move(mutated));
      break;
    }
    case 3:
      ctx.send(target, bytes);
      break;
  }
}

void ManglerNode::hash_state(Encoder& enc) const {
  enc.put_u8(36);
  enc.put_u64(rng_.state);
}

// ------------------------------------------------------ AppendScriptNode

AppendScriptNode::AppendScriptNode(
    SystemParams params, ProcessId self,
    std::vector<std::pair<std::uint64_t, Payload>> script)
    : params_(params), self_(self), script_(std::move(script)) {}

std::unique_ptr<Machine> AppendScriptNode::clone() const {
  return std::make_unique<AppendScriptNode>(*this);
}

void AppendScriptNode::on_start(Ctx& ctx) {
  for (const auto& [r, v] : script_) ctx.append_own(round_id::plain(r), v);
}

void AppendScriptNode::hash_state(Encoder& enc) const {
  enc.put_u8(37);
  enc.put_u64(script_.size());
  for (const auto& [r, v] : script_) enc.put_u64(r).put_bytes(v);
}

// ------------------------------------------------------------ RbJunkNode

RbJunkNode::RbJunkNode(SystemParams params, ProcessId self)
    : params_(params), self_(self) {}

std::unique_ptr<Machine> RbJunkNode::clone() const {
  return std::make_unique<RbJunkNode>(*this);
}

void RbJunkNode::on_start(Ctx& ctx) {
  ctx.rb_broadcast(Payload{0xde, 0xad, 0xbe, 0xef});
}

void RbJunkNode::hash_state(Encoder& enc) const { enc.put_u8(38); }

// ------------------------------------------------------------ RbHalfNode

RbHalfNode::RbHalfNode(SystemParams params, ProcessId self, Payload value,
                       std::vector<ProcessId> dests)
    : params_(params),
      self_(self),
      value_(std::move(value)),
      dests_(std::move(dests)) {}

std::unique_ptr<Machine> RbHalfNode::clone() const {
  return std::make_unique<RbHalfNode>(*this);
}

void RbHalfNode::on_start(Ctx& ctx) {
  RbF1Phase1 p1;
  p1.r = 1;
  p1.v = value_;
  p1.sig = ctx.sign(RbF1Phase1::body(1, value_));
  Envelope env{MsgType::RbF1Phase1, 0, p1.encode()};
  for (ProcessId d : dests_) ctx.send(d, env.encode());
}

void RbHalfNode::hash_state(Encoder& enc) const {
  enc.put_u8(39);
  enc.put_bytes(value_);
  for (ProcessId d : dests_) enc.put_u32(d);
}

// --------------------------------------------------------- RbTwoFaceNode

RbTwoFaceNode::RbTwoFaceNode(SystemParams params, ProcessId self,
                             Payload value_a, Payload value_b,
                             std::vector<ProcessId> dests_a,
                             std::vector<ProcessId> dests_b)
    : params_(params),
      self_(self),
      a_(std::move(value_a)),
      b_(std::move(value_b)),
      dests_a_(std::move(dests_a)),
      dests_b_(std::move(dests_b)) {}

std::unique_ptr<Machine> RbTwoFaceNode::clone() const {
  return std::make_unique<RbTwoFaceNode>(*this);
}

void RbTwoFaceNode::on_start(Ctx& ctx) {
  auto send_side = [&](const Payload& v, const std::vector<ProcessId>& dests) {
    RbF1Phase1 p1;
    p1.r = 1;
    p1.v = v;
    p1.sig = ctx.sign(RbF1Phase1::body(1, v));
    Envelope env{MsgType::RbF1Phase1, 0, p1.encode()};
    for (ProcessId d : dests) ctx.send(d, env.encode());
  };
  send_side(a_, dests_a_);
  send_side(b_, dests_b_);
}

void RbTwoFaceNode::hash_state(Encoder& enc) const {
  enc.put_u8(40);
  enc.put_bytes(a_).put_bytes(b_);
  for (ProcessId d : dests_a_) enc.put_u32(d);
  enc.put_u8(0xff);
  for (ProcessId d : dests_b_) enc.put_u32(d);
}

// --------------------------------------------------------------- factory

namespace {

[[noreturn]] void bad(const std::string& what) { throw SemanticError(what); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i <= s.size()) {
    std::size_t j = s.find(sep, i);
    if (j == std::string::npos) j = s.size();
    out.push_back(s.substr(i, j - i));
    i = j + 1;
  }
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(s, &used);
    if (used != s.size()) bad(what + ": trailing junk in '" + s + "'");
    return v;
  } catch (const SemanticError&) {
    throw;
  } catch (...) {
    bad(what + ": not a number: '" + s + "'");
  }
}

std::vector<ProcessId> parse_dests(const std::string& s, std::uint32_t n,
                                   const std::string& what) {
  std::vector<ProcessId> out;
  for (const auto& tok : split(s, ',')) {
    std::uint64_t v = parse_u64(tok, what);
    if (v >= n) bad(what + ": process " + tok + " out of range");
    out.push_back(static_cast<ProcessId>(v));
  }
  return out;
}

std::vector<std::pair<std::uint64_t, Payload>> parse_script(
    const std::string& s, const std::string& what) {
  std::vector<std::pair<std::uint64_t, Payload>> out;
  for (const auto& item : split(s, ';')) {
    std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      bad(what + ": expected number:value, got '" + item + "'");
    std::uint64_t num = parse_u64(item.substr(0, colon), what);
    out.emplace_back(num, to_payload(item.substr(colon + 1)));
  }
  return out;
}

class Kv {
 public:
  Kv(const std::string& behavior, const std::map<std::string, std::string>& kv)
      : behavior_(behavior), kv_(kv) {}

  std::string get(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end())
      bad("behavior " + behavior_ + " needs parameter '" + key + "'");
    return it->second;
  }

  void finish() const {
    for (const auto& [k, v] : kv_)
      if (!used_.count(k))
        bad("behavior " + behavior_ + " does not take parameter '" + k + "'");
  }

 private:
  std::string behavior_;
  const std::map<std::string, std::string>& kv_;
  std::set<std::string> used_;
};

/// Other processes, low ids first, split into a leading and trailing part.
std::pair<std::vector<ProcessId>, std::vector<ProcessId>> default_split(
    std::uint32_t n, ProcessId self) {
  std::vector<ProcessId> others;
  for (ProcessId p = 0; p < n; ++p)
    if (p != self) others.push_back(p);
  std::size_t cut = (others.size() + 1) / 2;
  return {std::vector<ProcessId>(others.begin(), others.begin() + cut),
          std::vector<ProcessId>(others.begin() + cut, others.end())};
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

std::vector<std::string> behavior_names() {
  return {"silent",     "partial-sender", "equivocator",
          "counter-replay", "mangler",    "append-script",
          "rb-junk",    "rb-half",        "rb-two-face"};
}

std::unique_ptr<Machine> make_behavior(
    const std::string& name, const std::map<std::string, std::string>& kv,
    SystemParams params, ProcessId self) {
  Kv args(name, kv);
  std::unique_ptr<Machine> out;

  if (name == "silent") {
    out = std::make_unique<SilentNode>();
  } else if (name == "partial-sender") {
    Payload value = to_payload(args.get("value", "x"));
    auto dests = parse_dests(args.require("dests"), params.n, name);
    out = std::make_unique<SrbPartialSenderNode>(params, self, std::move(value),
                                                 std::move(dests));
  } else if (name == "equivocator") {
    Payload a = to_payload(args.get("value_a", "a"));
    Payload b = to_payload(args.get("value_b", "b"));
    auto [da, db] = default_split(params.n, self);
    if (kv.count("dests_a")) da = parse_dests(args.get("dests_a", ""), params.n, name);
    if (kv.count("dests_b")) db = parse_dests(args.get("dests_b", ""), params.n, name);
    out = std::make_unique<SrbEquivocatorNode>(params, self, std::move(a),
                                               std::move(b), std::move(da),
                                               std::move(db));
  } else if (name == "counter-replay") {
    auto schedule = parse_script(args.require("schedule"), name);
    out = std::make_unique<CounterReplayNode>(params, self, std::move(schedule));
  } else if (name == "mangler") {
    std::uint64_t seed = parse_u64(args.get("seed", "1"), name);
    out = std::make_unique<ManglerNode>(params, self, seed);
  } else if (name == "append-script") {
    auto script = parse_script(args.require("script"), name);
    out = std::make_unique<AppendScriptNode>(params, self, std::move(script));
  } else if (name == "rb-junk") {
    out = std::make_unique<RbJunkNode>(params, self);
  } else if (name == "rb-half") {
    Payload value = to_payload(args.get("value", "x"));
    auto dests = parse_dests(args.require("dests"), params.n, name);
    out = std::make_unique<RbHalfNode>(params, self, std::move(value),
                                       std::move(dests));
  } else if (name == "rb-two-face") {
    Payload a = to_payload(args.get("value_a", "a"));
    Payload b = to_payload(args.get("value_b", "b"));
    auto [da, db] = default_split(params.n, self);
    if (kv.count("dests_a")) da = parse_dests(args.get("dests_a", ""), params.n, name);
    if (kv.count("dests_b")) db = parse_dests(args.get("dests_b", ""), params.n, name);
    out = std::make_unique<RbTwoFaceNode>(params, self, std::move(a),
                                          std::move(b), std::move(da),
                                          std::move(db));
  } else {
    bad("unknown behavior '" + name + "' (have: " + join_names(behavior_names()) +
        ")");
  }

  args.finish();
  return out;
}

}  // namespace unilab

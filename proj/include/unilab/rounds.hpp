#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "unilab/machine.hpp"
#include "unilab/observations.hpp"
#include "unilab/types.hpp"

namespace unilab {

/// Register round tags. A round id scopes one labeled communication round;
/// protocols that run many rounds concurrently (one per broadcast instance
/// and phase) pack the instance into the tag so all of a process's rounds
/// share its single register without collision.
namespace round_id {

inline constexpr std::uint32_t kPlainInstance = 0xffff;

constexpr std::uint64_t make(std::uint32_t instance, std::uint64_t seq,
                             std::uint8_t phase) {
  return (static_cast<std::uint64_t>(instance & 0xffff) << 48) |
         ((seq & 0xffffffffffull) << 8) | phase;
}

constexpr std::uint64_t plain(std::uint64_t r) {
  return make(kPlainInstance, r, 0);
}

constexpr std::uint32_t instance_of(std::uint64_t id) {
  return static_cast<std::uint32_t>(id >> 48);
}
constexpr std::uint64_t seq_of(std::uint64_t id) {
  return (id >> 8) & 0xffffffffffull;
}
constexpr std::uint8_t phase_of(std::uint64_t id) {
  return static_cast<std::uint8_t>(id & 0xff);
}

}  // namespace round_id

/// Drives one communication round for one process over the register store:
/// append (round, payload) to the own register, then read all n registers;
/// the round finishes when the n reads have linearized. A payload counts as
/// received from p whenever any read of p's register contains an entry
/// tagged with this round, so a Byzantine register owner contributes every
/// distinct value it managed to append.
///
/// The unidirectionality this buys: if two correct processes both run round
/// r, the one whose append linearizes first is seen by the other's reads,
/// because reads start only after the own append and registers never forget.
///
/// After finishing, a host that still wants more round traffic keeps the
/// round hungry: the driver then subscribes to register growth and re-reads
/// exactly when a log grows. Fruitless polling re-reads are protocol no-ops,
/// so eliding them preserves reachable protocol states.
class SwmrRoundDriver {
 public:
  struct Found {
    ProcessId from = 0;
    Payload payload;
    bool pre_finish = false;
  };

  struct ReadOutcome {
    std::vector<Found> found;
    bool just_finished = false;
  };

  SwmrRoundDriver() = default;
  SwmrRoundDriver(std::uint32_t n, std::uint64_t round) : n_(n), round_(round) {
    seen_len_.assign(n_, 0);
    armed_.assign(n_, false);
  }

  void start(Ctx& ctx, Payload payload) {
    if (started_)
      throw DoubleSend("round " + std::to_string(round_) + " already started");
    started_ = true;
    sent_ = payload;
    ctx.record(TraceKind::ActSend, ctx.self(), ctx.self(),
               act_send_round_payload(round_, payload));
    ctx.append_own(round_, std::move(payload));
  }

  /// Host forwards its on_append_applied for this round here.
  void on_append_applied(Ctx& ctx) {
    if (reads_issued_) return;
    reads_issued_ = true;
    for (ProcessId p = 0; p < n_; ++p) ctx.read_register(p, round_);
  }

  /// Host forwards read snapshots carrying this round's token here.
  ReadOutcome on_read(Ctx&, const Snapshot& snap) {
    ReadOutcome out;
    if (snap.owner < armed_.size()) armed_[snap.owner] = false;
    for (const auto& entry : snap.entries) {
      if (entry.round != round_) continue;
      auto& vals = received_[snap.owner];
      bool known = false;
      for (const auto& v : vals)
        if (v == entry.payload) {
          known = true;
          break;
        }
      if (known) continue;
      vals.push_back(entry.payload);
      Found f{snap.owner, entry.payload, !finished_};
      found_log_.push_back(f);
      out.found.push_back(std::move(f));
    }
    if (snap.owner < seen_len_.size())
      seen_len_[snap.owner] = snap.entries.size();
    if (!finished_ && reads_done_ < n_) {
      reads_done_++;
      if (reads_done_ == n_) {
        finished_ = true;
        out.just_finished = true;
      }
    }
    return out;
  }

  /// Arm growth subscriptions while the host remains hungry for this round.
  void pump(Ctx& ctx, bool hungry) {
    if (!finished_ || !hungry) return;
    for (ProcessId p = 0; p < n_; ++p) {
      if (armed_[p]) continue;
      armed_[p] = true;
      ctx.watch_register(p, seen_len_[p], round_);
    }
  }

  bool started() const { return started_; }
  bool finished() const { return finished_; }
  std::uint64_t round() const { return round_; }
  const Payload& sent() const { return sent_; }
  const std::map<ProcessId, std::vector<Payload>>& received() const {
    return received_;
  }
  const std::vector<Found>& found_log() const { return found_log_; }

  /// Fill a RoundObs for machine-side observation collection. Positions are
  /// found-log indices; pre-finish founds are a prefix, so the finish slots
  /// in right after them.
  void collect(RoundObs& out) const {
    if (started_) out.sent = sent_;
    out.finished = finished_;
    std::uint64_t pos = 0;
    for (const auto& f : found_log_) {
      if (f.pre_finish && finished_) out.finish_pos = pos + 1;
      out.received.push_back(RoundObs::Recv{f.from, f.payload, f.from, pos++,
                                            f.pre_finish});
    }
  }

  void hash_state(Encoder& enc) const {
    enc.put_u64(round_).put_u32(n_);
    enc.put_u8(started_ ? 1 : 0).put_u8(reads_issued_ ? 1 : 0);
    enc.put_u32(reads_done_).put_u8(finished_ ? 1 : 0);
    enc.put_bytes(sent_);
    for (auto l : seen_len_) enc.put_u64(l);
    for (bool a : armed_) enc.put_u8(a ? 1 : 0);
    enc.put_u64(found_log_.size());
    for (const auto& f : found_log_) {
      enc.put_u32(f.from).put_bytes(f.payload);
      enc.put_u8(f.pre_finish ? 1 : 0);
    }
  }

 private:
  std::uint32_t n_ = 0;
  std::uint64_t round_ = 0;
  bool started_ = false;
  bool reads_issued_ = false;
  std::uint32_t reads_done_ = 0;
  bool finished_ = false;
  Payload sent_;
  std::vector<std::uint64_t> seen_len_;
  std::vector<bool> armed_;
  std::map<ProcessId, std::vector<Payload>> received_;
  std::vector<Found> found_log_;
};

}  // namespace unilab

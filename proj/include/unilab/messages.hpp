#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "unilab/codec.hpp"
#include "unilab/crypto.hpp"
#include "unilab/types.hpp"
#include "unilab/util.hpp"

namespace unilab {

/// Top-level wire message discriminator. Every message on a link is an
/// envelope enc(type, instance, inner); unparseable bytes are dropped by
/// receivers.
enum class MsgType : std::uint8_t {
  SenderValue = 1,
  L2Proof = 2,
  RbF1Phase1 = 3,
  RbF1Phase2 = 4,
  NaiveRound = 5,
};

struct Envelope {
  MsgType type;
  ProcessId instance = 0;
  Payload inner;

  Payload encode() const;
  static std::optional<Envelope> decode(ByteSpan bytes);
};

/// (k, m) signed by the broadcast instance's sender.
struct SenderValue {
  ProcessId sender = 0;  // instance id and signer
  std::uint64_t k = 0;
  Payload m;
  Signature sig;

  static Payload body(ProcessId sender, std::uint64_t k, ByteSpan m);
  bool valid(const SignatureOracle& oracle) const {
    return oracle.verify(sender, body(sender, k, m), sig);
  }
  Payload encode() const;
  static std::optional<SenderValue> decode(ByteSpan bytes);
  bool operator==(const SenderValue&) const = default;
};

/// A sender value countersigned by one process (an echo in its register).
struct SignedCopy {
  SenderValue val;
  ProcessId copier = 0;
  Signature sig;

  static Payload body(const SenderValue& val);
  bool valid(const SignatureOracle& oracle) const {
    return oracle.verify(copier, body(val), sig) && val.valid(oracle);
  }
  Payload encode() const;
  static std::optional<SignedCopy> decode(ByteSpan bytes);
  bool operator==(const SignedCopy&) const = default;
};

/// t+1 matching signed copies, compiled and signed by one process.
struct L1Proof {
  ProcessId compiler = 0;
  std::uint64_t k = 0;
  std::map<ProcessId, SignedCopy> copies;
  Signature sig;

  static Payload body(std::uint64_t k, const std::map<ProcessId, SignedCopy>&);
  Payload encode() const;
  static std::optional<L1Proof> decode(ByteSpan bytes);
  bool operator==(const L1Proof&) const = default;
};

/// t+1 signed L1 proofs; possession justifies delivery.
struct L2Proof {
  ProcessId compiler = 0;
  std::uint64_t k = 0;
  std::map<ProcessId, L1Proof> proofs;
  Signature sig;

  static Payload body(std::uint64_t k, const std::map<ProcessId, L1Proof>&);
  Payload encode() const;
  static std::optional<L2Proof> decode(ByteSpan bytes);
  bool operator==(const L2Proof&) const = default;
};

// Validators. `val` is the candidate value the validating process holds for
// sequence k of the given instance; t is the fault budget.

/// A copy proves val iff it embeds the same (k, m), is countersigned by its
/// copier, and the inner sender signature verifies.
bool validate_copy(const SignatureOracle&, const SignedCopy& copy,
                   ProcessId sender, std::uint64_t k, const Payload& val_m);

bool validate_l1(const SignatureOracle&, const L1Proof& proof,
                 ProcessId sender, std::uint64_t k, const Payload& val_m,
                 std::uint32_t t);

/// Value-deriving L2 validation: checks thresholds and signatures and that
/// every embedded copy agrees on one value, which is returned.
std::optional<Payload> validate_l2(const SignatureOracle&, const L2Proof&,
                                   ProcessId sender, std::uint64_t k,
                                   std::uint32_t t);

// Round protocol wire formats (f = 1 broadcast and its naive cousin).

struct RbF1Phase1 {
  std::uint64_t r = 0;
  Payload v;
  Signature sig;

  static Payload body(std::uint64_t r, ByteSpan v);
  Payload encode() const;
  static std::optional<RbF1Phase1> decode(ByteSpan bytes);
};

struct RbF1Phase2 {
  struct Entry {
    ProcessId from = 0;
    Payload v;
    Signature sig;
  };
  std::uint64_t r = 0;
  std::vector<Entry> entries;

  Payload encode() const;
  static std::optional<RbF1Phase2> decode(ByteSpan bytes);
};

struct NaiveRound {
  std::uint64_t r = 0;
  Payload m;

  Payload encode() const;
  static std::optional<NaiveRound> decode(ByteSpan bytes);
};

}  // namespace unilab

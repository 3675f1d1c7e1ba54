#pragma once

#include <cstdint>
#include <set>
#include <utility>

#include "unilab/codec.hpp"
#include "unilab/types.hpp"
#include "unilab/util.hpp"

namespace unilab {

/// Idealized signature: a tag deterministically derived from (signer, bytes).
/// Tags carry no secret; unforgeability comes from the oracle's issuance
/// registry, not from the tag value.
struct Signature {
  ProcessId signer = 0;
  std::uint64_t tag = 0;

  bool operator==(const Signature&) const = default;
  auto operator<=>(const Signature&) const = default;
};

/// Registry-backed signing oracle with these guarantees:
///  - sign(p, m) by p always verifies for (p, m);
///  - verify(q, m, s) is false unless q previously signed exactly m;
///  - replaying an issued signature on the same bytes verifies (protocols
///    must defend with sequence numbers);
///  - a caller can only sign under its own identity.
/// Structurally equal messages sign identically because callers pass
/// canonical encodings (see Encoder).
class SignatureOracle {
 public:
  Signature sign(ProcessId caller, ProcessId as, ByteSpan message) {
    if (caller != as)
      throw IdentityViolation("process " + std::to_string(caller) +
                              " cannot sign as " + std::to_string(as));
    return sign_unchecked(as, message);
  }

  Signature sign_unchecked(ProcessId as, ByteSpan message) {
    auto key = std::make_pair(as, Payload(message.begin(), message.end()));
    if (issued_.insert(key).second)
      issued_hash_ ^= entry_hash(as, message);
    return Signature{as, tag_for(as, message)};
  }

  bool verify(ProcessId signer, ByteSpan message, const Signature& sig) const {
    if (sig.signer != signer || sig.tag != tag_for(signer, message))
      return false;
    return issued_.contains(
        std::make_pair(signer, Payload(message.begin(), message.end())));
  }

  /// Order-independent digest of the issuance registry (for state hashing).
  std::uint64_t state_hash() const { return issued_hash_; }

  std::size_t issued_count() const { return issued_.size(); }

 private:
  static std::uint64_t tag_for(ProcessId signer, ByteSpan message) {
    return fnv1a64(message, fnv1a64_u64(signer, kFnvOffset));
  }

  static std::uint64_t entry_hash(ProcessId signer, ByteSpan message) {
    // Different seed than tag_for so the registry digest is not a function
    // of the tags alone.
    return fnv1a64(message, fnv1a64_u64(signer, 0x9ae16a3b2f90404full));
  }

  std::set<std::pair<ProcessId, Payload>> issued_;
  std::uint64_t issued_hash_ = 0;
};

}  // namespace unilab

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace unilab {

using Byte = std::uint8_t;
using Payload = std::vector<Byte>;
using ByteSpan = std::span<const Byte>;

std::string to_hex(ByteSpan bytes);
std::optional<Payload> from_hex(const std::string& text);

inline Payload to_payload(const std::string& s) {
  return Payload(s.begin(), s.end());
}

/// FNV-1a, 64 bit. All content hashing in the simulator goes through this so
/// that hashes are identical across platforms and runs.
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a64(ByteSpan bytes, std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (Byte b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (int i = 7; i >= 0; --i) {
    h ^= static_cast<Byte>(v >> (8 * i));
    h *= kFnvPrime;
  }
  return h;
}

/// Deterministic PRNG (splitmix64). Used instead of <random> distributions
/// because their output is not pinned down by the standard.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, bound). bound = 0 yields 0.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) return 0;
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  bool coin() { return (next() & 1) != 0; }
};

}  // namespace unilab

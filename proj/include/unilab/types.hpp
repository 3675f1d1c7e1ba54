#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>

namespace unilab {

using ProcessId = std::uint32_t;

/// Destination wildcard for send(): one delivery per process, self included.
inline constexpr ProcessId kAllProcesses = 0xffffffffu;

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidParams : SimError {
  using SimError::SimError;
};
struct IdentityViolation : SimError {
  using SimError::SimError;
};
struct AclViolation : SimError {
  using SimError::SimError;
};
struct DoubleSend : SimError {
  using SimError::SimError;
};
struct NotSender : SimError {
  using SimError::SimError;
};
struct BoundExceeded : SimError {
  using SimError::SimError;
};
struct ParseError : SimError {
  ParseError(const std::string& msg, std::size_t line)
      : SimError(msg + " (line " + std::to_string(line) + ")"), line(line) {}
  std::size_t line;
};
struct SemanticError : SimError {
  using SimError::SimError;
};

/// System size n and Byzantine budget t.
struct SystemParams {
  std::uint32_t n = 1;
  std::uint32_t t = 0;

  void validate() const {
    if (n < 1) throw InvalidParams("n must be at least 1");
    if (t >= n) throw InvalidParams("t must be smaller than n");
  }

  bool operator==(const SystemParams&) const = default;
};

inline void require_quorum_bound(const SystemParams& p, const char* what) {
  if (p.n < 2 * p.t + 1)
    throw InvalidParams(std::string(what) + " requires n >= 2t+1, got n=" +
                        std::to_string(p.n) + " t=" + std::to_string(p.t));
}

inline void validate_byzantine_set(const SystemParams& p,
                                   const std::set<ProcessId>& byz) {
  p.validate();
  if (byz.size() > p.t)
    throw InvalidParams("byzantine set exceeds budget t=" + std::to_string(p.t));
  for (ProcessId b : byz)
    if (b >= p.n) throw InvalidParams("byzantine id out of range");
}

}  // namespace unilab

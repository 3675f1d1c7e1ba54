#pragma once

#include <cstdint>
#include <vector>

#include "unilab/codec.hpp"
#include "unilab/types.hpp"
#include "unilab/util.hpp"

namespace unilab {

struct RegisterEntry {
  std::uint64_t round = 0;
  Payload payload;

  bool operator==(const RegisterEntry&) const = default;
};

/// One append-only single-writer multi-reader register per process.
/// ACL: only the owner may append; everyone may read. Entries are never
/// mutated or removed, so any read returns a prefix-closed snapshot and
/// two reads by the same process observe monotonically growing logs.
class RegisterStore {
 public:
  explicit RegisterStore(std::uint32_t n) : logs_(n) {}

  void append(ProcessId caller, ProcessId owner, std::uint64_t round,
              Payload payload) {
    if (caller != owner)
      throw AclViolation("process " + std::to_string(caller) +
                         " cannot append to register of " +
                         std::to_string(owner));
    logs_.at(owner).push_back(RegisterEntry{round, std::move(payload)});
  }

  const std::vector<RegisterEntry>& log(ProcessId owner) const {
    return logs_.at(owner);
  }

  std::uint32_t size() const { return static_cast<std::uint32_t>(logs_.size()); }

  void hash_into(Encoder& enc) const {
    for (const auto& log : logs_) {
      enc.put_u64(log.size());
      for (const auto& e : log) {
        enc.put_u64(e.round);
        enc.put_bytes(e.payload);
      }
    }
  }

 private:
  std::vector<std::vector<RegisterEntry>> logs_;
};

}  // namespace unilab

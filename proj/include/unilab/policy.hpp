#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "unilab/types.hpp"

namespace unilab {

/// Adversarial scheduling knob for one class of pending events.
/// For message events, from/to are sender and receiver; for register
/// operation events, from is the register owner and to the accessor.
/// nullopt acts as a wildcard. First matching rule wins.
struct LinkRule {
  enum class Scope : std::uint8_t { Message, ObjectOp, Both };
  enum class Action : std::uint8_t { DeliverNow, DelayUntil, HoldPastHorizon };

  Scope scope = Scope::Message;
  std::optional<ProcessId> from;
  std::optional<ProcessId> to;
  Action action = Action::DeliverNow;
  std::uint64_t until = 0;  // DelayUntil: earliest dispatch index
};

/// Controls when issued events become dispatchable. With no rules and
/// delay_spread = 0 every event is enabled immediately; a nonzero spread
/// adds a seed-derived delay in [0, spread] to each event, which reorders
/// deliveries across links while per-link FIFO order is preserved by the
/// kernel. Held events never dispatch; a run that ends with one pending
/// counts as censored, and liveness verdicts over it stay inconclusive.
struct DeliveryPolicy {
  std::vector<LinkRule> rules;
  std::uint64_t seed = 0;
  std::uint32_t delay_spread = 0;
  std::uint64_t horizon = 100000;

  const LinkRule* match(bool is_message, ProcessId from, ProcessId to) const {
    for (const auto& r : rules) {
      if (r.scope == LinkRule::Scope::Message && !is_message) continue;
      if (r.scope == LinkRule::Scope::ObjectOp && is_message) continue;
      if (r.from && *r.from != from) continue;
      if (r.to && *r.to != to) continue;
      return &r;
    }
    return nullptr;
  }

  bool has_holds() const {
    for (const auto& r : rules)
      if (r.action == LinkRule::Action::HoldPastHorizon) return true;
    return false;
  }
};

}  // namespace unilab

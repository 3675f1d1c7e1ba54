#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "unilab/event.hpp"
#include "unilab/types.hpp"
#include "unilab/util.hpp"

namespace unilab {

/// What one process observed in one labeled communication round.
struct RoundObs {
  struct Recv {
    ProcessId from = 0;
    Payload payload;
    ProcessId via = 0;     // for relayed values: who carried them
    std::uint64_t pos = 0;  // position in the per-source order
    bool pre_finish = false;
  };

  std::optional<Payload> sent;
  bool finished = false;
  std::uint64_t finish_pos = 0;
  std::vector<Recv> received;

  bool received_from(ProcessId p, bool pre_finish_only) const {
    for (const auto& r : received)
      if (r.from == p && (!pre_finish_only || r.pre_finish)) return true;
    return false;
  }
};

struct DeliveryObs {
  ProcessId sender = 0;
  std::uint64_t k = 0;
  Payload m;
};

struct AttestObs {
  std::uint64_t k = 0;
  std::uint64_t c = 0;
  Payload m;
};

struct ProcObs {
  bool byzantine = false;
  std::map<std::uint64_t, RoundObs> rounds;
  std::vector<DeliveryObs> deliveries;       // in delivery order
  std::map<std::uint64_t, Payload> broadcasts;  // sequence -> payload
  std::vector<AttestObs> attests;            // in issue order
  bool decided = false;
  std::optional<Payload> decision;           // nullopt after decided: bottom
};

/// Protocol-level outcomes of a run, extracted either from a serialized
/// trace or directly from terminal machine state; property checkers consume
/// only this, so both extraction paths feed the same verdict logic.
struct Observations {
  std::vector<ProcObs> procs;
  bool horizon_exceeded = false;
};

Observations observations_from_trace(const Trace& trace, std::uint32_t n,
                                     const std::set<ProcessId>& byzantine);

// Canonical payload encodings for action records. Producers (machines) and
// the trace extractor above must agree on these.
Payload act_broadcast_payload(std::uint64_t k, ByteSpan m);
Payload act_send_point_payload(ByteSpan bytes);
Payload act_send_round_payload(std::uint64_t round, ByteSpan value);
Payload act_recv_payload(std::uint64_t round, ProcessId from, ByteSpan payload,
                         ProcessId via);
Payload act_finish_payload(std::uint64_t round);
Payload act_deliver_payload(ProcessId sender, std::uint64_t k, ByteSpan m);
Payload act_decide_payload(bool is_bottom, ByteSpan value);
Payload act_attest_payload(std::uint64_t k, std::uint64_t c, ByteSpan m);

}  // namespace unilab

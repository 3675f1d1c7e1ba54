#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unilab/types.hpp"
#include "unilab/util.hpp"

namespace unilab {

/// Kernel events (msg/obj/step) and per-process observable actions, in one
/// enum so the trace is a single ordered stream.
enum class TraceKind : std::uint8_t {
  MsgDeliver,    // msg: a message delivery event
  ObjApply,      // obj: a register operation linearization event
  Step,          // step: a process activation event
  ActBroadcast,  // bcast
  ActSend,       // send
  ActRecv,       // recv
  ActFinish,     // finish
  ActDeliver,    // deliver
  ActDecide,     // decide
  ActAttest,     // attest
};

const char* trace_kind_token(TraceKind k);
std::optional<TraceKind> trace_kind_from_token(std::string_view token);

struct TraceEntry {
  std::uint64_t seq = 0;
  TraceKind kind = TraceKind::Step;
  ProcessId origin = 0;
  ProcessId target = 0;
  Payload payload;

  bool operator==(const TraceEntry&) const = default;
};

/// Deterministic run record. Serializes to a line-oriented text format:
/// sorted "# key value" header lines, then one entry per line,
///   <seq> <kind> <origin> -> <target> <hex payload | ->
/// Identical (config, seed) runs produce byte-identical text.
struct Trace {
  std::map<std::string, std::string> meta;
  std::vector<TraceEntry> entries;
  bool horizon_exceeded = false;

  std::string to_text() const;
  static std::optional<Trace> parse(std::string_view text);

  bool operator==(const Trace&) const = default;
};

}  // namespace unilab

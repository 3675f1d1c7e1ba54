#include "unilab/observations.hpp"

#include "unilab/codec.hpp"

namespace unilab {

Payload act_broadcast_payload(std::uint64_t k, ByteSpan m) {
  return Encoder().put_u64(k).put_bytes(m).take();
}

Payload act_send_point_payload(ByteSpan bytes) {
  return Encoder().put_u8(0).put_bytes(bytes).take();
}

Payload act_send_round_payload(std::uint64_t round, ByteSpan value) {
  return Encoder().put_u8(1).put_u64(round).put_bytes(value).take();
}

Payload act_recv_payload(std::uint64_t round, ProcessId from, ByteSpan payload,
                         ProcessId via) {
  return Encoder()
      .put_u64(round)
      .put_u32(from)
      .put_bytes(payload)
      .put_u32(via)
      .take();
}

Payload act_finish_payload(std::uint64_t round) {
  return Encoder().put_u64(round).take();
}

Payload act_deliver_payload(ProcessId sender, std::uint64_t k, ByteSpan m) {
  return Encoder().put_u32(sender).put_u64(k).put_bytes(m).take();
}

Payload act_decide_payload(bool is_bottom, ByteSpan value) {
  return Encoder().put_u8(is_bottom ? 1 : 0).put_bytes(value).take();
}

Payload act_attest_payload(std::uint64_t k, std::uint64_t c, ByteSpan m) {
  return Encoder().put_u64(k).put_u64(c).put_bytes(m).take();
}

Observations observations_from_trace(const Trace& trace, std::uint32_t n,
                                     const std::set<ProcessId>& byzantine) {
  Observations obs;
  obs.procs.resize(n);
  obs.horizon_exceeded = trace.horizon_exceeded;
  for (ProcessId b : byzantine)
    if (b < n) obs.procs[b].byzantine = true;

  for (const auto& e : trace.entries) {
    ProcessId who = (e.kind == TraceKind::ActSend) ? e.origin : e.target;
    if (who >= n) continue;
    ProcObs& p = obs.procs[who];
    Decoder dec(e.payload);
    switch (e.kind) {
      case TraceKind::ActBroadcast: {
        auto k = dec.take_u64();
        auto m = dec.take_bytes();
        if (k && m) p.broadcasts[*k] = *m;
        break;
      }
      case TraceKind::ActSend: {
        auto tag = dec.take_u8();
        if (tag && *tag == 1) {
          auto round = dec.take_u64();
          auto value = dec.take_bytes();
          if (round && value) p.rounds[*round].sent = *value;
        }
        break;
      }
      case TraceKind::ActRecv: {
        auto round = dec.take_u64();
        auto from = dec.take_u32();
        auto payload = dec.take_bytes();
        auto via = dec.take_u32();
        if (!round || !from || !payload || !via) break;
        RoundObs& r = p.rounds[*round];
        r.received.push_back(
            RoundObs::Recv{*from, *payload, *via, e.seq, !r.finished});
        break;
      }
      case TraceKind::ActFinish: {
        auto round = dec.take_u64();
        if (!round) break;
        RoundObs& r = p.rounds[*round];
        r.finished = true;
        r.finish_pos = e.seq;
        break;
      }
      case TraceKind::ActDeliver: {
        auto sender = dec.take_u32();
        auto k = dec.take_u64();
        auto m = dec.take_bytes();
        if (sender && k && m) p.deliveries.push_back({*sender, *k, *m});
        break;
      }
      case TraceKind::ActDecide: {
        auto bottom = dec.take_u8();
        auto value = dec.take_bytes();
        if (!bottom || !value) break;
        p.decided = true;
        p.decision = *bottom ? std::nullopt : std::make_optional(*value);
        break;
      }
      case TraceKind::ActAttest: {
        auto k = dec.take_u64();
        auto c = dec.take_u64();
        auto m = dec.take_bytes();
        if (k && c && m) p.attests.push_back({*k, *c, *m});
        break;
      }
      case TraceKind::MsgDeliver:
      case TraceKind::ObjApply:
      case TraceKind::Step:
        break;
    }
  }
  return obs;
}

}  // namespace unilab

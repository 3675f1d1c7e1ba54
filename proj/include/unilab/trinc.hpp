#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "unilab/machine.hpp"
#include "unilab/srb.hpp"
#include "unilab/types.hpp"

namespace unilab {

/// A trusted-counter attestation: Trinket holder q bound message m to
/// counter value c, sequenced at position k of q's broadcast stream.
struct Attestation {
  ProcessId q = 0;
  std::uint64_t k = 0;
  std::uint64_t c = 0;
  Payload m;

  bool operator==(const Attestation&) const = default;
};

/// Trusted monotonic counter emulation over sequenced broadcast: Attest
/// accepts only strictly increasing counter values and disseminates (c, m)
/// as the holder's next sequenced value; verifiers store an incoming
/// attestation from q only when its counter exceeds everything stored for
/// q so far. Guarantees surfaced to checkers:
///  - a Trinket never attests two messages at the same counter value;
///  - an attestation verifies at a correct verifier only after its
///    broadcast was delivered there (so verification implies every earlier
///    attestation of that Trinket was seen first);
///  - fabricated attestations never verify.
class TrincNode : public Machine, public SrbDeliverHook {
 public:
  TrincNode(SystemParams params, ProcessId self,
            std::vector<std::pair<std::uint64_t, Payload>> schedule);

  std::unique_ptr<Machine> clone() const override;
  void on_start(Ctx&) override;
  void on_message(Ctx&, ProcessId from, const Payload& bytes) override;
  void on_read(Ctx&, const Snapshot&, std::uint64_t token) override;
  void on_append_applied(Ctx&, std::uint64_t round) override;
  void on_srb_deliver(Ctx&, ProcessId sender, std::uint64_t k,
                      const Payload& m) override;
  void hash_state(Encoder&) const override;
  void collect(ProcessId self, Observations&) const override;

  /// Trinket call. Null result: the counter value was not an increase.
  std::optional<Attestation> attest(Ctx&, std::uint64_t c, const Payload& m);

  /// Verifier-side query against the stored attestation set.
  bool check_attestation(const Attestation& a) const;

  const std::vector<Attestation>& issued() const { return issued_; }

 private:
  SystemParams params_;
  ProcessId self_;
  std::vector<std::pair<std::uint64_t, Payload>> schedule_;
  SrbMux mux_;
  std::uint64_t last_c_ = 0;
  std::vector<Attestation> issued_;
  // Verifier state: per holder, highest stored counter and the stored set.
  std::map<ProcessId, std::uint64_t> highest_;
  std::map<ProcessId, std::map<std::uint64_t, std::pair<std::uint64_t, Payload>>>
      stored_;  // q -> c -> (k, m)
};

/// Payload layout for attested values on the broadcast stream.
Payload trinc_value_encode(std::uint64_t c, ByteSpan m);
std::optional<std::pair<std::uint64_t, Payload>> trinc_value_decode(
    ByteSpan bytes);

}  // namespace unilab

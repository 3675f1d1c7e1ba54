#include <string>

#include "doctest.h"
#include "unilab/messages.hpp"
#include "unilab/scenario.hpp"
#include "unilab/srb.hpp"

using namespace unilab;

namespace {

ScenarioConfig correct_sender_cfg(std::uint32_t n, std::uint64_t seed,
                                  const std::string& broadcasts) {
  std::string text =
      "protocol = srb\n"
      "n = " + std::to_string(n) + "\n"
      "t = 1\n"
      "seed = " + std::to_string(seed) + "\n"
      "delay_spread = 4\n"
      "sender = 0\n"
      "broadcasts = " + broadcasts + "\n";
  return parse_scenario(text);
}

ScenarioConfig equivocator_cfg(std::uint64_t seed) {
  std::string text =
      "protocol = srb\n"
      "n = 3\n"
      "t = 1\n"
      "seed = " + std::to_string(seed) + "\n"
      "delay_spread = 20\n"
      "sender = 0\n"
      "[process 0]\n"
      "behavior = equivocator\n"
      "value_a = a\n"
      "value_b = b\n"
      "dests_a = 1\n"
      "dests_b = 2\n";
  return parse_scenario(text);
}

void require_all_satisfied(const ScenarioRun& run) {
  for (const auto& [name, r] : run.results)
    CHECK_MESSAGE(r.verdict == Verdict::Satisfied, name, ": ", r.detail);
}

}  // namespace

TEST_CASE("a correct sender's stream is delivered everywhere in order") {
  for (std::uint32_t n : {3u, 4u}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      auto run = run_scenario(correct_sender_cfg(n, seed, "a;b;c"));
      require_all_satisfied(run);
      CHECK(!run.observations.horizon_exceeded);
      for (ProcessId p = 0; p < n; ++p) {
        const auto& dels = run.observations.procs[p].deliveries;
        REQUIRE(dels.size() == 3);
        for (std::uint64_t k = 1; k <= 3; ++k) {
          CHECK(dels[k - 1].sender == 0);
          CHECK(dels[k - 1].k == k);
        }
        CHECK(dels[0].m == to_payload("a"));
        CHECK(dels[1].m == to_payload("b"));
        CHECK(dels[2].m == to_payload("c"));
      }
    }
  }
}

TEST_CASE("broadcast assigns sequence numbers 1, 2, 3") {
  auto cfg = correct_sender_cfg(3, 1, "x;y");
  auto sim = build_simulation(cfg);
  sim->run_until_quiescent();
  const auto& node = dynamic_cast<const SrbNode&>(sim->machine(0));
  CHECK(node.mux().my_seq() == 2);
  const auto& log = node.mux().broadcast_log();
  REQUIRE(log.size() == 2);
  CHECK(log.at(1) == to_payload("x"));
  CHECK(log.at(2) == to_payload("y"));
}

TEST_CASE("receivers track the sender's delivery cursor") {
  auto cfg = correct_sender_cfg(3, 5, "m");
  auto sim = build_simulation(cfg);
  sim->run_until_quiescent();
  for (ProcessId p = 0; p < 3; ++p) {
    const auto& node = dynamic_cast<const SrbNode&>(sim->machine(p));
    const auto* inst = node.mux().instance(0);
    REQUIRE(inst != nullptr);
    CHECK(inst->next_p == 2);  // one delivery done, cursor past it
    CHECK(inst->delivered.at(1) == to_payload("m"));
  }
}

TEST_CASE("an equivocating sender cannot split the correct processes") {
  // Schedules decide whether anything is delivered at all; what is pinned
  // here is one seed per outcome class, with safety intact in both.
  SUBCASE("a schedule where one value wins everywhere") {
    auto run = run_scenario(equivocator_cfg(12));
    require_all_satisfied(run);
    const auto& d1 = run.observations.procs[1].deliveries;
    const auto& d2 = run.observations.procs[2].deliveries;
    REQUIRE(d1.size() == 1);
    REQUIRE(d2.size() == 1);
    CHECK(d1[0].m == d2[0].m);
    CHECK(d1[0].k == 1);
    CHECK(d2[0].k == 1);
    CHECK(d1[0].m == to_payload("a"));
  }
  SUBCASE("a schedule where both sides refuse") {
    auto run = run_scenario(equivocator_cfg(1));
    require_all_satisfied(run);
    CHECK(run.observations.procs[1].deliveries.empty());
    CHECK(run.observations.procs[2].deliveries.empty());
  }
  SUBCASE("never two different values, over many seeds") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      auto cfg = equivocator_cfg(seed);
      auto run = run_scenario(cfg);
      require_all_satisfied(run);
      const auto& d1 = run.observations.procs[1].deliveries;
      const auto& d2 = run.observations.procs[2].deliveries;
      if (!d1.empty() && !d2.empty()) CHECK(d1[0].m == d2[0].m);
    }
  }
}

TEST_CASE("a sender reaching only part of the system cannot cause a split") {
  // The value lands at process 1 only; whether the quorum machinery can
  // finish the job from there is schedule dependent, but no two correct
  // processes may ever disagree and sequencing stays gapless.
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::string text =
        "protocol = srb\n"
        "n = 3\n"
        "t = 1\n"
        "seed = " + std::to_string(seed) + "\n"
        "delay_spread = 10\n"
        "sender = 0\n"
        "[process 0]\n"
        "behavior = partial-sender\n"
        "value = v\n"
        "dests = 1\n";
    auto run = run_scenario(parse_scenario(text));
    require_all_satisfied(run);
    for (ProcessId p : {1u, 2u})
      for (const auto& d : run.observations.procs[p].deliveries)
        CHECK(d.m == to_payload("v"));
  }
}

TEST_CASE("back-to-back broadcasts overtake the per-sequence rounds safely") {
  // Ten values at once: later sender values arrive while earlier sequence
  // numbers are mid-round, exercising the buffering paths.
  auto run = run_scenario(correct_sender_cfg(3, 9, "a;b;c;d;e;f;g;h;i;j"));
  require_all_satisfied(run);
  for (ProcessId p = 0; p < 3; ++p) {
    const auto& dels = run.observations.procs[p].deliveries;
    REQUIRE(dels.size() == 10);
    for (std::size_t i = 0; i < dels.size(); ++i) CHECK(dels[i].k == i + 1);
  }
}

// Proof validators, exercised on hand-built certificates.

namespace {

struct ProofKit {
  SignatureOracle oracle;
  ProcessId sender = 0;
  std::uint64_t k = 1;

  SenderValue sender_value(const Payload& m) {
    SenderValue sv{sender, k, m, {}};
    sv.sig = oracle.sign_unchecked(sender, SenderValue::body(sender, k, m));
    return sv;
  }

  SignedCopy copy_by(ProcessId copier, const SenderValue& sv) {
    SignedCopy c{sv, copier, {}};
    c.sig = oracle.sign_unchecked(copier, SignedCopy::body(sv));
    return c;
  }

  L1Proof l1_by(ProcessId compiler, const SenderValue& sv,
                std::vector<ProcessId> copiers) {
    L1Proof prf;
    prf.compiler = compiler;
    prf.k = k;
    for (ProcessId c : copiers) prf.copies[c] = copy_by(c, sv);
    prf.sig = oracle.sign_unchecked(compiler, L1Proof::body(k, prf.copies));
    return prf;
  }

  L2Proof l2_by(ProcessId compiler, std::vector<L1Proof> l1s) {
    L2Proof prf;
    prf.compiler = compiler;
    prf.k = k;
    for (auto& l1 : l1s) prf.proofs[l1.compiler] = std::move(l1);
    prf.sig =
        oracle.sign_unchecked(compiler, L2Proof::body(k, prf.proofs));
    return prf;
  }
};

}  // namespace

TEST_CASE("a countersigned matching copy validates") {
  ProofKit kit;
  auto sv = kit.sender_value(to_payload("m"));
  auto copy = kit.copy_by(1, sv);
  CHECK(validate_copy(kit.oracle, copy, 0, 1, to_payload("m")));
  CHECK(!validate_copy(kit.oracle, copy, 0, 1, to_payload("other")));
  CHECK(!validate_copy(kit.oracle, copy, 0, 2, to_payload("m")));
  CHECK(!validate_copy(kit.oracle, copy, 1, 1, to_payload("m")));
}

TEST_CASE("a copy whose countersignature was never issued fails") {
  ProofKit kit;
  auto sv = kit.sender_value(to_payload("m"));
  SignedCopy forged{sv, 1, Signature{1, 12345}};
  CHECK(!validate_copy(kit.oracle, forged, 0, 1, to_payload("m")));
}

TEST_CASE("first tier proofs need t+1 matching valid copies") {
  ProofKit kit;
  auto sv = kit.sender_value(to_payload("m"));
  auto good = kit.l1_by(1, sv, {1, 2});
  CHECK(validate_l1(kit.oracle, good, 0, 1, to_payload("m"), 1));
  CHECK(!validate_l1(kit.oracle, good, 0, 1, to_payload("m"), 2));  // short

  auto thin = kit.l1_by(1, sv, {1});
  CHECK(!validate_l1(kit.oracle, thin, 0, 1, to_payload("m"), 1));

  // One poisoned inner copy rejects the whole proof.
  auto bad = good;
  bad.copies[2].sig.tag ^= 1;
  CHECK(!validate_l1(kit.oracle, bad, 0, 1, to_payload("m"), 1));

  // Wrong sequence number at validation time.
  CHECK(!validate_l1(kit.oracle, good, 0, 2, to_payload("m"), 1));

  // Compiler signature over different copies fails.
  auto resigned = good;
  resigned.copies.erase(2);
  CHECK(!validate_l1(kit.oracle, resigned, 0, 1, to_payload("m"), 1));
}

TEST_CASE("second tier proofs derive the value they certify") {
  ProofKit kit;
  auto sv = kit.sender_value(to_payload("m"));
  auto l2 = kit.l2_by(2, {kit.l1_by(1, sv, {1, 2}), kit.l1_by(2, sv, {1, 2})});
  CHECK(validate_l2(kit.oracle, l2, 0, 1, 1) == to_payload("m"));
  CHECK(validate_l2(kit.oracle, l2, 0, 2, 1) == std::nullopt);
  CHECK(validate_l2(kit.oracle, l2, 0, 1, 2) == std::nullopt);  // short
}

TEST_CASE("a second tier proof mixing two values is rejected") {
  ProofKit kit;
  auto sva = kit.sender_value(to_payload("a"));
  auto svb = kit.sender_value(to_payload("b"));
  auto mixed =
      kit.l2_by(1, {kit.l1_by(1, sva, {1, 2}), kit.l1_by(2, svb, {1, 2})});
  CHECK(validate_l2(kit.oracle, mixed, 0, 1, 1) == std::nullopt);
}

TEST_CASE("proof certificates survive the wire") {
  ProofKit kit;
  auto sv = kit.sender_value(to_payload("m"));
  auto l2 = kit.l2_by(2, {kit.l1_by(1, sv, {1, 2}), kit.l1_by(2, sv, {1, 2})});
  auto decoded = L2Proof::decode(l2.encode());
  REQUIRE(decoded.has_value());
  CHECK(*decoded == l2);
  CHECK(validate_l2(kit.oracle, *decoded, 0, 1, 1) == to_payload("m"));
}

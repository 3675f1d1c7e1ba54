#include <string>

#include "doctest.h"
#include "unilab/checkers.hpp"
#include "unilab/scenario.hpp"
#include "unilab/trinc.hpp"
#include "unilab/util.hpp"

using namespace unilab;

namespace {

ScenarioConfig trinc_cfg(std::uint64_t seed, std::uint32_t delay_spread = 2) {
  std::string text =
      "protocol = trinc\n"
      "n = 3\n"
      "t = 1\n"
      "seed = " + std::to_string(seed) + "\n"
      "delay_spread = " + std::to_string(delay_spread) + "\n"
      "[process 0]\n"
      "schedule = 1:a;3:b\n"
      "[process 1]\n"
      "schedule = 2:x\n"
      "[process 2]\n"
      "schedule = 5:y\n";
  return parse_scenario(text);
}

TrincNode& trinket(Simulation& sim, ProcessId p) {
  return dynamic_cast<TrincNode&>(sim.machine(p));
}

}  // namespace

TEST_CASE("the counter gate accepts only strict increases") {
  ScenarioConfig cfg;
  cfg.protocol = "trinc";
  cfg.params = {3, 1};
  auto sim = build_simulation(cfg);
  sim->run_until_quiescent();  // empty schedules; nothing happens

  Ctx ctx(*sim, 0);
  auto& node = trinket(*sim, 0);

  auto first = node.attest(ctx, 1, to_payload("x"));
  REQUIRE(first.has_value());
  CHECK(first->k == 1);
  CHECK(first->c == 1);
  CHECK(first->m == to_payload("x"));

  // Same counter again: the hardware refuses.
  CHECK(!node.attest(ctx, 1, to_payload("y")).has_value());

  // Gaps are fine, only the order matters.
  auto third = node.attest(ctx, 5, to_payload("y"));
  REQUIRE(third.has_value());
  CHECK(third->k == 2);
  CHECK(third->c == 5);

  CHECK(!node.attest(ctx, 4, to_payload("z")).has_value());
  CHECK(!node.attest(ctx, 5, to_payload("z")).has_value());
  auto fourth = node.attest(ctx, 6, to_payload("w"));
  REQUIRE(fourth.has_value());
  CHECK(fourth->k == 3);

  REQUIRE(node.issued().size() == 3);
  CHECK(node.issued()[0] == *first);
  CHECK(node.issued()[2] == *fourth);
}

TEST_CASE("refusals issue nothing at random, across many sequences") {
  ScenarioConfig cfg;
  cfg.protocol = "trinc";
  cfg.params = {3, 1};
  SplitMix64 rng(77);
  for (int round = 0; round < 50; ++round) {
    auto sim = build_simulation(cfg);
    sim->run_until_quiescent();
    Ctx ctx(*sim, 0);
    auto& node = trinket(*sim, 0);
    std::uint64_t last_c = 0;
    for (int i = 0; i < 20; ++i) {
      std::uint64_t c = rng.below(12);
      auto got = node.attest(ctx, c, to_payload("p"));
      CHECK(got.has_value() == (c > last_c));
      if (got) {
        CHECK(got->c == c);
        last_c = c;
      }
    }
    sim->run_until_quiescent();  // drain the broadcasts the calls queued
  }
}

TEST_CASE("every issued attestation verifies everywhere once the run ends") {
  for (std::uint64_t seed : {1ull, 2ull, 9ull, 31ull}) {
    auto cfg = trinc_cfg(seed, 6);
    auto run = run_scenario(cfg);
    for (const auto& [name, r] : run.results)
      CHECK_MESSAGE(r.verdict == Verdict::Satisfied, name, ": ", r.detail);

    auto sim = build_simulation(cfg);
    sim->run_until_quiescent();
    for (ProcessId holder = 0; holder < 3; ++holder)
      for (const auto& a : trinket(*sim, holder).issued())
        for (ProcessId verifier = 0; verifier < 3; ++verifier)
          CHECK_MESSAGE(trinket(*sim, verifier).check_attestation(a),
                        "attestation by ", holder, " c=", a.c,
                        " unverifiable at ", verifier);
  }
}

TEST_CASE("fabricated attestations never verify") {
  auto cfg = trinc_cfg(3);
  auto sim = build_simulation(cfg);
  sim->run_until_quiescent();

  SplitMix64 rng(123);
  for (int i = 0; i < 200; ++i) {
    Attestation fake;
    fake.q = static_cast<ProcessId>(rng.below(3));
    fake.k = rng.below(5);
    fake.c = rng.below(8);
    fake.m = to_payload("f" + std::to_string(rng.below(1000)));
    bool genuinely_issued = false;
    for (const auto& a : trinket(*sim, fake.q).issued())
      if (a == fake) genuinely_issued = true;
    if (genuinely_issued) continue;
    for (ProcessId verifier = 0; verifier < 3; ++verifier)
      CHECK(!trinket(*sim, verifier).check_attestation(fake));
  }

  // Close variants of a real attestation fail too.
  const auto& real = trinket(*sim, 0).issued().at(0);
  for (ProcessId verifier = 0; verifier < 3; ++verifier) {
    Attestation off = real;
    off.m = to_payload("not it");
    CHECK(!trinket(*sim, verifier).check_attestation(off));
    off = real;
    off.c += 100;
    CHECK(!trinket(*sim, verifier).check_attestation(off));
    off = real;
    off.q = 1;
    CHECK(!trinket(*sim, verifier).check_attestation(off));
  }
}

TEST_CASE("verification flips from false to true at delivery") {
  ScenarioConfig cfg;
  cfg.protocol = "trinc";
  cfg.params = {3, 1};
  ProcessOverride ov;
  ov.schedule = {{1, to_payload("x")}};
  cfg.overrides[0] = ov;
  // Every delivery into process 2 sorts behind the rest of the run.
  cfg.rules.push_back(LinkRule{LinkRule::Scope::Message, std::nullopt, 2,
                               LinkRule::Action::DelayUntil, 5000});

  auto sim = build_simulation(cfg);
  // First event: process 0 starts and issues its attestation.
  REQUIRE(sim->step().has_value());
  const auto& issued = trinket(*sim, 0).issued();
  REQUIRE(issued.size() == 1);
  Attestation a = issued[0];

  // Not delivered anywhere yet, so no verifier accepts it.
  CHECK(!trinket(*sim, 1).check_attestation(a));
  CHECK(!trinket(*sim, 2).check_attestation(a));

  sim->run_until_quiescent();
  CHECK(trinket(*sim, 1).check_attestation(a));
  CHECK(trinket(*sim, 2).check_attestation(a));
}

TEST_CASE("a counter replaying holder cannot bind two messages to one value") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    std::string text =
        "protocol = trinc\n"
        "n = 3\n"
        "t = 1\n"
        "seed = " + std::to_string(seed) + "\n"
        "delay_spread = 8\n"
        "[process 0]\n"
        "behavior = counter-replay\n"
        "schedule = 1:first;1:second;2:third\n";
    auto run = run_scenario(parse_scenario(text));
    for (const auto& [name, r] : run.results)
      CHECK_MESSAGE(r.verdict == Verdict::Satisfied, name, ": ", r.detail);

    // Recomputed verifier stores keep only the first binding of c=1.
    for (ProcessId verifier : {1u, 2u}) {
      auto store = recompute_attestation_store(
          run.observations.procs[verifier]);
      auto it = store.find(0);
      if (it == store.end()) continue;
      if (auto c1 = it->second.find(1); c1 != it->second.end())
        CHECK(c1->second.second == to_payload("first"));
    }
  }
}

TEST_CASE("attested values survive their wire encoding") {
  auto bytes = trinc_value_encode(42, to_payload("msg"));
  auto decoded = trinc_value_decode(bytes);
  REQUIRE(decoded.has_value());
  CHECK(decoded->first == 42);
  CHECK(decoded->second == to_payload("msg"));
  CHECK(!trinc_value_decode(to_payload("garbage")).has_value());
}

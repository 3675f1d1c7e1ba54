#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "unilab/checkers.hpp"
#include "unilab/observations.hpp"
#include "unilab/scenario.hpp"
#include "unilab/util.hpp"

using namespace unilab;

namespace {

std::string scenario_path(const std::string& name) {
  return std::string(UNILAB_SCENARIO_DIR) + "/" + name;
}

std::string golden_path(const std::string& stem) {
  return std::string(UNILAB_GOLDEN_DIR) + "/" + stem + ".trace";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open ", path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Every parse error carries the line it came from; callers that only care
// about the location use this.
std::size_t failing_line(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e.line;
  }
  return 0;
}

}  // namespace

TEST_CASE("bundled correct sender file parses to its advertised shape") {
  ScenarioConfig cfg = load_scenario_file(scenario_path("srb_correct_sender.scn"));
  CHECK(cfg.name == "srb-correct-sender");
  CHECK(cfg.protocol == "srb");
  CHECK(cfg.params.n == 4);
  CHECK(cfg.params.t == 1);
  CHECK(cfg.seed == 7);
  CHECK(cfg.delay_spread == 3);
  CHECK(cfg.horizon == 100000);
  CHECK(cfg.sender == 0);
  REQUIRE(cfg.broadcasts.size() == 2);
  CHECK(cfg.broadcasts[0] == to_payload("alpha"));
  CHECK(cfg.broadcasts[1] == to_payload("beta"));
  CHECK(cfg.overrides.empty());
  CHECK(cfg.rules.empty());
  CHECK(scenario_byzantine(cfg).empty());
}

TEST_CASE("link sections expand into delivery rules") {
  ScenarioConfig cfg = parse_scenario(
      "protocol = naive-rb-rounds\n"
      "n = 4\n"
      "t = 1\n"
      "\n"
      "[link 1 2]\n"
      "action = hold\n"
      "scope = msg\n"
      "both = 1\n"
      "\n"
      "[link * 3]\n"
      "action = delay\n"
      "until = 40\n"
      "scope = all\n");
  REQUIRE(cfg.rules.size() == 3);
  CHECK(cfg.rules[0].from == ProcessId{1});
  CHECK(cfg.rules[0].to == ProcessId{2});
  CHECK(cfg.rules[0].action == LinkRule::Action::HoldPastHorizon);
  CHECK(cfg.rules[0].scope == LinkRule::Scope::Message);
  CHECK(cfg.rules[1].from == ProcessId{2});
  CHECK(cfg.rules[1].to == ProcessId{1});
  CHECK(!cfg.rules[2].from.has_value());
  CHECK(cfg.rules[2].to == ProcessId{3});
  CHECK(cfg.rules[2].action == LinkRule::Action::DelayUntil);
  CHECK(cfg.rules[2].until == 40);
  CHECK(cfg.rules[2].scope == LinkRule::Scope::Both);
}

TEST_CASE("process sections carry overrides and loose behavior parameters") {
  ScenarioConfig cfg = parse_scenario(
      "protocol = srb\n"
      "n = 3\n"
      "t = 1\n"
      "sender = 0\n"
      "\n"
      "[process 1]\n"
      "behavior = equivocator\n"
      "value_a = left\n"
      "value_b = right\n"
      "\n"
      "[process 2]\n"
      "input = special\n"
      "schedule = 1:a;3:b\n");
  REQUIRE(cfg.overrides.count(1) == 1);
  const ProcessOverride& ov1 = cfg.overrides.at(1);
  REQUIRE(ov1.behavior.has_value());
  CHECK(*ov1.behavior == "equivocator");
  CHECK(ov1.behavior_params.at("value_a") == "left");
  CHECK(ov1.behavior_params.at("value_b") == "right");
  const ProcessOverride& ov2 = cfg.overrides.at(2);
  CHECK(!ov2.behavior.has_value());
  CHECK(ov2.input == to_payload("special"));
  REQUIRE(ov2.schedule.has_value());
  REQUIRE(ov2.schedule->size() == 2);
  CHECK((*ov2.schedule)[0].first == 1);
  CHECK((*ov2.schedule)[0].second == to_payload("a"));
  CHECK((*ov2.schedule)[1].first == 3);
  CHECK(scenario_byzantine(cfg) == std::set<ProcessId>{1});
}

TEST_CASE("parse errors name the offending line") {
  CHECK(failing_line("protocol = srb\nnonsense\n") == 2);
  CHECK(failing_line("protocol = srb\nn = 3\ncolor = red\n") == 3);
  CHECK(failing_line("protocol = srb\nn = three\n") == 2);
  CHECK(failing_line("[session 1]\n") == 1);
  CHECK(failing_line("[process 1\n") == 1);
  CHECK(failing_line("[process]\n") == 1);
  CHECK(failing_line("[link 1]\n") == 1);
  CHECK(failing_line("[link 1 2 3]\n") == 1);
  CHECK(failing_line("protocol = srb\n[link 0 1]\naction = explode\n") == 3);
  CHECK(failing_line("protocol = srb\n[link 0 1]\nscope = wide\n") == 3);
  CHECK(failing_line("protocol = srb\n[link 0 1]\nboth = maybe\n") == 3);
  CHECK(failing_line("protocol = srb\n[link 0 1]\nspeed = 9\n") == 3);
  CHECK(failing_line("transport = postal\n") == 1);
  CHECK(failing_line("= srb\n") == 1);
  CHECK(failing_line("\n# comment only\nprotocol = srb\nbad\n") == 4);
}

TEST_CASE("semantic validation rejects ill formed configurations") {
  CHECK_THROWS_AS(parse_scenario("n = 3\nt = 1\n"), SemanticError);
  CHECK_THROWS_AS(parse_scenario("protocol = telepathy\nn = 3\n"),
                  SemanticError);
  CHECK_THROWS_AS(parse_scenario("protocol = srb\nn = 3\nt = 2\n"),
                  SemanticError);
  CHECK_THROWS_AS(parse_scenario("protocol = trinc\nn = 4\nt = 2\n"),
                  SemanticError);
  CHECK_NOTHROW(parse_scenario("protocol = vwba\nn = 3\nt = 2\n"));
  CHECK_THROWS_AS(parse_scenario("protocol = srb\nn = 3\nt = 1\nsender = 3\n"),
                  SemanticError);
  CHECK_THROWS_AS(
      parse_scenario("protocol = srb\nn = 3\nt = 1\n[process 5]\ninput = x\n"),
      SemanticError);
  CHECK_THROWS_AS(
      parse_scenario("protocol = srb\nn = 3\nt = 1\n[link 0 7]\naction = hold\n"),
      SemanticError);
  CHECK_THROWS_AS(
      parse_scenario("protocol = srb\nn = 3\nt = 1\nproperties = srb-p9\n"),
      SemanticError);
  CHECK_THROWS_AS(parse_scenario("protocol = srb\nn = 3\nt = 1\n"
                                 "[process 1]\nbehavior = silent\n"
                                 "[process 2]\nbehavior = silent\n"),
                  SemanticError);
}

TEST_CASE("behavior references are resolved when the simulation is built") {
  ScenarioConfig cfg = parse_scenario(
      "protocol = srb\nn = 3\nt = 1\n[process 1]\nbehavior = gremlin\n");
  CHECK_THROWS_AS(build_simulation(cfg), SemanticError);

  ScenarioConfig cfg2 = parse_scenario(
      "protocol = srb\nn = 3\nt = 1\n"
      "[process 1]\nbehavior = silent\nvolume = 11\n");
  CHECK_THROWS_AS(build_simulation(cfg2), SemanticError);
}

TEST_CASE("default properties follow the protocol and explicit lists win") {
  CHECK(default_properties("srb") ==
        std::vector<std::string>{"unidirectional", "srb-p1", "srb-p2", "srb-p3",
                                 "srb-p4", "srb-agreement"});
  CHECK(default_properties("naive-rb-rounds") ==
        std::vector<std::string>{"unidirectional", "round-termination"});

  ScenarioConfig cfg = parse_scenario("protocol = srb\nn = 3\nt = 1\n");
  CHECK(effective_properties(cfg) == default_properties("srb"));

  ScenarioConfig picky = parse_scenario(
      "protocol = srb\nn = 3\nt = 1\nproperties = srb-p1, srb-agreement\n");
  CHECK(effective_properties(picky) ==
        std::vector<std::string>{"srb-p1", "srb-agreement"});

  for (const auto& name : property_names()) CHECK(property_exists(name));
  CHECK(!property_exists("srb-p9"));
}

TEST_CASE("input fallback prefers the override then the scenario default") {
  ScenarioConfig cfg = parse_scenario(
      "protocol = vwba\nn = 3\nt = 0\ninput = base\n"
      "[process 1]\ninput = special\n");
  CHECK(scenario_input(cfg, 0) == to_payload("base"));
  CHECK(scenario_input(cfg, 1) == to_payload("special"));
  CHECK(scenario_input(cfg, 2) == to_payload("base"));

  ScenarioConfig bare = parse_scenario("protocol = vwba\nn = 3\nt = 0\n");
  CHECK(scenario_input(bare, 0) == to_payload("m0"));
  CHECK(scenario_input(bare, 2) == to_payload("m2"));

  ScenarioMeta meta = meta_of(cfg);
  CHECK(meta.inputs.at(0) == to_payload("base"));
  CHECK(meta.inputs.at(1) == to_payload("special"));

  // Broadcast protocols key on the sender's payload list, not per process
  // inputs, so their meta carries none.
  ScenarioConfig srb = parse_scenario("protocol = srb\nn = 3\nt = 1\n");
  CHECK(meta_of(srb).inputs.empty());
}

TEST_CASE("every bundled scenario loads and runs to its advertised verdict") {
  std::map<std::string, bool> expect_violation = {
      {"rbf1_partition.scn", false},
      {"separation_scenario3.scn", true},
      {"srb_correct_sender.scn", false},
      {"srb_equivocating_sender.scn", false},
      {"trinc_counter_exchange.scn", false},
  };
  std::set<std::string> found;
  for (const auto& entry :
       std::filesystem::directory_iterator(UNILAB_SCENARIO_DIR)) {
    if (entry.path().extension() != ".scn") continue;
    std::string base = entry.path().filename().string();
    found.insert(base);
    REQUIRE_MESSAGE(expect_violation.count(base), "unexpected scenario ", base);
    ScenarioConfig cfg = load_scenario_file(entry.path().string());
    ScenarioRun run = run_scenario(cfg);
    CHECK_MESSAGE(run.any_violated() == expect_violation[base],
                  base, " verdicts came out wrong");
    for (const auto& [prop, res] : run.results)
      if (!expect_violation[base])
        CHECK_MESSAGE(res.verdict != Verdict::Violated, base, " violated ",
                      prop, ": ", res.detail);
  }
  CHECK(found.size() == expect_violation.size());
}

TEST_CASE("the held quorum scenario blames exactly the far pair") {
  ScenarioConfig cfg =
      load_scenario_file(scenario_path("separation_scenario3.scn"));
  ScenarioRun run = run_scenario(cfg);
  auto pairs = unidirectional_violations(run.observations);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::pair<ProcessId, ProcessId>{3, 4});

  bool saw = false;
  for (const auto& [prop, res] : run.results)
    if (prop == "unidirectional") {
      saw = true;
      CHECK(res.verdict == Verdict::Violated);
    }
  CHECK(saw);
}

TEST_CASE("runs are reproducible byte for byte") {
  ScenarioConfig cfg = load_scenario_file(scenario_path("srb_correct_sender.scn"));
  ScenarioRun a = run_scenario(cfg);
  ScenarioRun b = run_scenario(cfg);
  CHECK(a.trace.to_text() == b.trace.to_text());
  REQUIRE(a.results.size() == b.results.size());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    CHECK(a.results[i].first == b.results[i].first);
    CHECK(a.results[i].second.verdict == b.results[i].second.verdict);
  }
}

TEST_CASE("trace metadata reconstructs the checker configuration") {
  ScenarioConfig cfg =
      load_scenario_file(scenario_path("srb_equivocating_sender.scn"));
  ScenarioRun run = run_scenario(cfg);

  std::string text = run.trace.to_text();
  std::optional<Trace> parsed = Trace::parse(text);
  REQUIRE(parsed.has_value());
  CHECK(*parsed == run.trace);

  ScenarioMeta direct = meta_of(cfg);
  ScenarioMeta revived = meta_from_trace(*parsed);
  CHECK(revived.params == direct.params);
  CHECK(revived.protocol == direct.protocol);
  CHECK(revived.byzantine == direct.byzantine);
  CHECK(revived.inputs == direct.inputs);
  CHECK(revived.holds_present == direct.holds_present);

  // The revived metadata must drive the checkers to the same verdicts.
  Observations obs =
      observations_from_trace(*parsed, revived.params.n, revived.byzantine);
  for (const auto& [prop, res] : run.results) {
    CheckResult again = check_property(prop, revived, obs);
    CHECK_MESSAGE(again.verdict == res.verdict, prop, " drifted on revival");
  }
}

TEST_CASE("trace extraction matches terminal machine state") {
  ScenarioConfig cfg = load_scenario_file(scenario_path("rbf1_partition.scn"));
  ScenarioRun run = run_scenario(cfg);

  std::unique_ptr<Simulation> sim = build_simulation(cfg);
  sim->run_until_quiescent();
  Observations machine = sim->collect();

  REQUIRE(machine.procs.size() == run.observations.procs.size());
  CHECK(machine.horizon_exceeded == run.observations.horizon_exceeded);
  for (ProcessId p = 0; p < cfg.params.n; ++p) {
    const ProcObs& a = machine.procs[p];
    const ProcObs& b = run.observations.procs[p];
    CHECK(a.byzantine == b.byzantine);
    REQUIRE(a.rounds.size() == b.rounds.size());
    for (const auto& [round, ra] : a.rounds) {
      REQUIRE(b.rounds.count(round) == 1);
      const RoundObs& rb = b.rounds.at(round);
      CHECK(ra.finished == rb.finished);
      CHECK(ra.sent == rb.sent);
      for (ProcessId q = 0; q < cfg.params.n; ++q) {
        CHECK(ra.received_from(q, true) == rb.received_from(q, true));
        CHECK(ra.received_from(q, false) == rb.received_from(q, false));
      }
    }
  }
}

TEST_CASE("golden traces for the bundled scenarios") {
  bool regen = std::getenv("UNILAB_REGEN_GOLDEN") != nullptr;
  for (const std::string stem :
       {"srb_correct_sender", "srb_equivocating_sender", "separation_scenario3",
        "trinc_counter_exchange", "rbf1_partition"}) {
    ScenarioConfig cfg = load_scenario_file(scenario_path(stem + ".scn"));
    std::string text = run_scenario(cfg).trace.to_text();
    if (regen) {
      std::filesystem::create_directories(UNILAB_GOLDEN_DIR);
      std::ofstream out(golden_path(stem), std::ios::binary);
      out << text;
      continue;
    }
    CHECK_MESSAGE(text == slurp(golden_path(stem)), stem,
                  " drifted from its recorded trace");
  }
}

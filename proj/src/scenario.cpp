#include "unilab/scenario.hpp"

#include <fstream>
#include <sstream>

#include "unilab/behaviors.hpp"
#include "unilab/observations.hpp"
#include "unilab/rbf1.hpp"
#include "unilab/srb.hpp"
#include "unilab/trinc.hpp"
#include "unilab/vwba.hpp"

namespace unilab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i <= s.size()) {
    std::size_t j = s.find(sep, i);
    if (j == std::string::npos) j = s.size();
    out.push_back(s.substr(i, j - i));
    i = j + 1;
  }
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

std::uint64_t num(const std::string& s, std::size_t line,
                  const std::string& what) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(s, &used);
    if (used != s.size()) throw ParseError(what + ": bad number '" + s + "'", line);
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (...) {
    throw ParseError(what + ": bad number '" + s + "'", line);
  }
}

std::vector<std::pair<std::uint64_t, Payload>> parse_pairs(
    const std::string& s, std::size_t line, const std::string& what) {
  std::vector<std::pair<std::uint64_t, Payload>> out;
  for (const auto& item : split(s, ';')) {
    std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw ParseError(what + ": expected number:value, got '" + item + "'",
                       line);
    out.emplace_back(num(item.substr(0, colon), line, what),
                     to_payload(item.substr(colon + 1)));
  }
  return out;
}

std::optional<ProcessId> link_endpoint(const std::string& tok,
                                       std::size_t line) {
  if (tok == "*") return std::nullopt;
  return static_cast<ProcessId>(num(tok, line, "link endpoint"));
}

struct PendingLink {
  std::optional<ProcessId> a, b;
  LinkRule::Scope scope = LinkRule::Scope::Message;
  LinkRule::Action action = LinkRule::Action::DeliverNow;
  std::uint64_t until = 0;
  bool both = false;
};

}  // namespace

const std::vector<std::string>& known_protocols() {
  static const std::vector<std::string> names = {
      "srb", "trinc", "vwba", "uni-swmr", "uni-rb-f1", "naive-rb-rounds"};
  return names;
}

ScenarioConfig parse_scenario(const std::string& text) {
  ScenarioConfig cfg;
  enum class Sec { Global, Process, Link };
  Sec sec = Sec::Global;
  ProcessId cur_proc = 0;
  std::optional<PendingLink> link;
  std::vector<std::pair<ProcessId, std::size_t>> seen_process_ids;

  auto flush_link = [&]() {
    if (!link) return;
    LinkRule rule;
    rule.scope = link->scope;
    rule.from = link->a;
    rule.to = link->b;
    rule.action = link->action;
    rule.until = link->until;
    cfg.rules.push_back(rule);
    if (link->both) {
      std::swap(rule.from, rule.to);
      cfg.rules.push_back(rule);
    }
    link.reset();
  };

  std::size_t lineno = 0;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section", lineno);
      flush_link();
      std::istringstream hdr(line.substr(1, line.size() - 2));
      std::string kind;
      hdr >> kind;
      if (kind == "process") {
        std::string id;
        if (!(hdr >> id)) throw ParseError("[process N] needs an id", lineno);
        cur_proc = static_cast<ProcessId>(num(id, lineno, "process id"));
        seen_process_ids.emplace_back(cur_proc, lineno);
        cfg.overrides[cur_proc];
        sec = Sec::Process;
      } else if (kind == "link") {
        std::string a, b;
        if (!(hdr >> a >> b))
          throw ParseError("[link A B] needs two endpoints", lineno);
        link = PendingLink{};
        link->a = link_endpoint(a, lineno);
        link->b = link_endpoint(b, lineno);
        sec = Sec::Link;
      } else {
        throw ParseError("unknown section '" + kind + "'", lineno);
      }
      std::string rest;
      if (hdr >> rest) throw ParseError("trailing tokens in section", lineno);
      continue;
    }

    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key = value", lineno);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", lineno);

    switch (sec) {
      case Sec::Global:
        if (key == "name") {
          cfg.name = value;
        } else if (key == "protocol") {
          cfg.protocol = value;
        } else if (key == "n") {
          cfg.params.n = static_cast<std::uint32_t>(num(value, lineno, key));
        } else if (key == "t") {
          cfg.params.t = static_cast<std::uint32_t>(num(value, lineno, key));
        } else if (key == "seed") {
          cfg.seed = num(value, lineno, key);
        } else if (key == "delay_spread") {
          cfg.delay_spread =
              static_cast<std::uint32_t>(num(value, lineno, key));
        } else if (key == "horizon") {
          cfg.horizon = num(value, lineno, key);
        } else if (key == "sender") {
          cfg.sender = static_cast<ProcessId>(num(value, lineno, key));
        } else if (key == "input") {
          cfg.default_input = to_payload(value);
        } else if (key == "broadcasts") {
          cfg.broadcasts.clear();
          for (const auto& item : split(value, ';'))
            cfg.broadcasts.push_back(to_payload(item));
        } else if (key == "transport") {
          if (value != "channel" && value != "plain")
            throw ParseError("transport must be channel or plain", lineno);
          cfg.transport = value;
        } else if (key == "properties") {
          cfg.properties.clear();
          for (const auto& item : split(value, ','))
            cfg.properties.push_back(trim(item));
        } else {
          throw ParseError("unknown key '" + key + "'", lineno);
        }
        break;

      case Sec::Process: {
        ProcessOverride& ov = cfg.overrides[cur_proc];
        if (key == "behavior") {
          ov.behavior = value;
        } else if (key == "input") {
          ov.input = to_payload(value);
        } else if (key == "schedule") {
          ov.schedule = parse_pairs(value, lineno, key);
          // Scripted behaviors take the schedule as an ordinary parameter.
          ov.behavior_params[key] = value;
        } else {
          ov.behavior_params[key] = value;
        }
        break;
      }

      case Sec::Link:
        if (key == "action") {
          if (value == "deliver")
            link->action = LinkRule::Action::DeliverNow;
          else if (value == "delay")
            link->action = LinkRule::Action::DelayUntil;
          else if (value == "hold")
            link->action = LinkRule::Action::HoldPastHorizon;
          else
            throw ParseError("action must be deliver, delay, or hold", lineno);
        } else if (key == "until") {
          link->until = num(value, lineno, key);
        } else if (key == "scope") {
          if (value == "msg")
            link->scope = LinkRule::Scope::Message;
          else if (value == "obj")
            link->scope = LinkRule::Scope::ObjectOp;
          else if (value == "all")
            link->scope = LinkRule::Scope::Both;
          else
            throw ParseError("scope must be msg, obj, or all", lineno);
        } else if (key == "both") {
          if (value == "1" || value == "true")
            link->both = true;
          else if (value == "0" || value == "false")
            link->both = false;
          else
            throw ParseError("both must be 0 or 1", lineno);
        } else {
          throw ParseError("unknown link key '" + key + "'", lineno);
        }
        break;
    }
  }
  flush_link();

  if (cfg.protocol.empty()) throw SemanticError("scenario names no protocol");
  bool known = false;
  for (const auto& p : known_protocols()) known = known || p == cfg.protocol;
  if (!known)
    throw SemanticError("unknown protocol '" + cfg.protocol + "'");
  cfg.params.validate();
  if ((cfg.protocol == "srb" || cfg.protocol == "trinc") &&
      cfg.params.n < 2 * cfg.params.t + 1)
    throw SemanticError("protocol " + cfg.protocol + " requires n >= 2t+1");
  if (cfg.sender >= cfg.params.n)
    throw SemanticError("sender out of range");
  if (scenario_byzantine(cfg).size() > cfg.params.t)
    throw SemanticError("more scripted behaviors than the budget t allows");
  for (const auto& [id, at] : seen_process_ids)
    if (id >= cfg.params.n)
      throw SemanticError("process id " + std::to_string(id) +
                          " out of range (line " + std::to_string(at) + ")");
  for (const auto& rule : cfg.rules)
    if ((rule.from && *rule.from >= cfg.params.n) ||
        (rule.to && *rule.to >= cfg.params.n))
      throw SemanticError("link endpoint out of range");
  for (const auto& prop : cfg.properties)
    if (!property_exists(prop))
      throw SemanticError("unknown property '" + prop + "'");
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SemanticError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

Payload scenario_input(const ScenarioConfig& cfg, ProcessId p) {
  auto it = cfg.overrides.find(p);
  if (it != cfg.overrides.end() && it->second.input) return *it->second.input;
  if (cfg.default_input) return *cfg.default_input;
  return to_payload("m" + std::to_string(p));
}

std::set<ProcessId> scenario_byzantine(const ScenarioConfig& cfg) {
  std::set<ProcessId> byz;
  for (const auto& [p, ov] : cfg.overrides)
    if (ov.behavior) byz.insert(p);
  return byz;
}

ScenarioMeta meta_of(const ScenarioConfig& cfg) {
  ScenarioMeta meta;
  meta.params = cfg.params;
  meta.protocol = cfg.protocol;
  meta.byzantine = scenario_byzantine(cfg);
  bool inputs_matter = cfg.protocol == "vwba" || cfg.protocol == "uni-swmr" ||
                       cfg.protocol == "uni-rb-f1" ||
                       cfg.protocol == "naive-rb-rounds";
  if (inputs_matter)
    for (ProcessId p = 0; p < cfg.params.n; ++p)
      if (!meta.byzantine.count(p)) meta.inputs[p] = scenario_input(cfg, p);
  for (const auto& rule : cfg.rules)
    if (rule.action == LinkRule::Action::HoldPastHorizon)
      meta.holds_present = true;
  return meta;
}

std::vector<std::string> default_properties(const std::string& protocol) {
  if (protocol == "srb")
    return {"unidirectional", "srb-p1", "srb-p2", "srb-p3", "srb-p4",
            "srb-agreement"};
  if (protocol == "trinc")
    return {"srb-p3", "srb-p4", "trinc-liveness", "trinc-nonequiv",
            "trinc-soundness"};
  if (protocol == "vwba")
    return {"unidirectional", "round-termination", "vwba-agreement",
            "vwba-validity"};
  return {"unidirectional", "round-termination"};
}

std::vector<std::string> effective_properties(const ScenarioConfig& cfg) {
  if (!cfg.properties.empty()) return cfg.properties;
  return default_properties(cfg.protocol);
}

namespace {

std::vector<Payload> effective_broadcasts(const ScenarioConfig& cfg) {
  if (!cfg.broadcasts.empty()) return cfg.broadcasts;
  if (cfg.default_input) return {*cfg.default_input};
  return {to_payload("m1")};
}

}  // namespace

std::unique_ptr<Simulation> build_simulation(const ScenarioConfig& cfg) {
  std::set<ProcessId> byz = scenario_byzantine(cfg);
  std::vector<std::unique_ptr<Machine>> machines;
  for (ProcessId p = 0; p < cfg.params.n; ++p) {
    auto it = cfg.overrides.find(p);
    if (it != cfg.overrides.end() && it->second.behavior) {
      machines.push_back(make_behavior(*it->second.behavior,
                                       it->second.behavior_params, cfg.params,
                                       p));
      continue;
    }
    if (cfg.protocol == "srb") {
      std::vector<Payload> bs;
      if (p == cfg.sender) bs = effective_broadcasts(cfg);
      machines.push_back(
          std::make_unique<SrbNode>(cfg.params, p, cfg.sender, std::move(bs)));
    } else if (cfg.protocol == "trinc") {
      std::vector<std::pair<std::uint64_t, Payload>> schedule;
      if (it != cfg.overrides.end() && it->second.schedule)
        schedule = *it->second.schedule;
      machines.push_back(
          std::make_unique<TrincNode>(cfg.params, p, std::move(schedule)));
    } else if (cfg.protocol == "vwba") {
      machines.push_back(
          std::make_unique<VwbaNode>(cfg.params, p, scenario_input(cfg, p)));
    } else if (cfg.protocol == "uni-swmr") {
      machines.push_back(
          std::make_unique<UniSwmrNode>(cfg.params, p, scenario_input(cfg, p)));
    } else if (cfg.protocol == "uni-rb-f1") {
      machines.push_back(std::make_unique<RbF1Node>(
          cfg.params, p, scenario_input(cfg, p), cfg.transport == "plain"));
    } else if (cfg.protocol == "naive-rb-rounds") {
      machines.push_back(
          std::make_unique<NaiveRbNode>(cfg.params, p, scenario_input(cfg, p)));
    } else {
      throw SemanticError("unknown protocol '" + cfg.protocol + "'");
    }
  }
  DeliveryPolicy policy;
  policy.rules = cfg.rules;
  policy.seed = cfg.seed;
  policy.delay_spread = cfg.delay_spread;
  policy.horizon = cfg.horizon;
  return std::make_unique<Simulation>(cfg.params, policy, std::move(machines),
                                      std::move(byz));
}

void stamp_trace_meta(Trace& trace, const ScenarioConfig& cfg) {
  auto& meta = trace.meta;
  meta["name"] = cfg.name;
  meta["protocol"] = cfg.protocol;
  meta["n"] = std::to_string(cfg.params.n);
  meta["t"] = std::to_string(cfg.params.t);
  meta["seed"] = std::to_string(cfg.seed);
  meta["delay_spread"] = std::to_string(cfg.delay_spread);
  meta["horizon"] = std::to_string(cfg.horizon);
  if (cfg.protocol == "srb") meta["sender"] = std::to_string(cfg.sender);
  if (cfg.protocol == "uni-rb-f1") meta["transport"] = cfg.transport;
  std::set<ProcessId> byz = scenario_byzantine(cfg);
  if (!byz.empty()) {
    std::string list;
    for (ProcessId b : byz) {
      if (!list.empty()) list += ",";
      list += std::to_string(b);
    }
    meta["byzantine"] = list;
  }
  ScenarioMeta cm = meta_of(cfg);
  meta["holds"] = cm.holds_present ? "1" : "0";
  for (const auto& [p, input] : cm.inputs)
    meta["input_" + std::to_string(p)] = to_hex(input);
}

ScenarioRun run_scenario(const ScenarioConfig& cfg) {
  auto sim = build_simulation(cfg);
  sim->run_until_quiescent();

  ScenarioRun run;
  run.trace = sim->trace();
  stamp_trace_meta(run.trace, cfg);
  ScenarioMeta cm = meta_of(cfg);
  std::set<ProcessId> byz = scenario_byzantine(cfg);

  run.observations = observations_from_trace(run.trace, cfg.params.n, byz);
  for (const auto& prop : effective_properties(cfg))
    run.results.emplace_back(prop, check_property(prop, cm, run.observations));
  return run;
}

ScenarioMeta meta_from_trace(const Trace& trace) {
  ScenarioMeta meta;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = trace.meta.find(key);
    if (it == trace.meta.end()) return std::nullopt;
    return it->second;
  };
  auto n = get("n");
  if (!n) throw SemanticError("trace header carries no n");
  meta.params.n = static_cast<std::uint32_t>(std::stoul(*n));
  if (auto t = get("t")) meta.params.t = static_cast<std::uint32_t>(std::stoul(*t));
  meta.params.validate();
  if (auto proto = get("protocol")) meta.protocol = *proto;
  if (auto byz = get("byzantine"))
    for (const auto& tok : split(*byz, ','))
      meta.byzantine.insert(static_cast<ProcessId>(std::stoul(tok)));
  if (auto holds = get("holds")) meta.holds_present = *holds == "1";
  for (ProcessId p = 0; p < meta.params.n; ++p) {
    if (auto hex = get("input_" + std::to_string(p))) {
      auto bytes = from_hex(*hex);
      if (bytes) meta.inputs[p] = *bytes;
    }
  }
  return meta;
}

}  // namespace unilab

#include "unilab/enumerate.hpp"

namespace unilab {

namespace {

using U128 = unsigned __int128;
constexpr U128 kU128Max = ~U128{0};

U128 sat_add(U128 a, U128 b, bool& exact) {
  if (kU128Max - a < b) {
    exact = false;
    return kU128Max;
  }
  return a + b;
}

struct NodeResult {
  U128 paths = 0;
  bool exact = true;
};

// Drain every enabled non-message event, lowest front first. The order is
// fixed, so states reached between message deliveries are canonical.
void close_local(Simulation& sim) {
  for (;;) {
    bool dispatched = false;
    for (std::uint64_t seq : sim.enabled_fronts()) {
      if (sim.pending_kind(seq) != TraceKind::MsgDeliver) {
        sim.dispatch_seq(seq);
        dispatched = true;
        break;
      }
    }
    if (!dispatched) return;
  }
}

std::vector<std::uint64_t> message_fronts(const Simulation& sim) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t seq : sim.enabled_fronts())
    if (sim.pending_kind(seq) == TraceKind::MsgDeliver) out.push_back(seq);
  return out;
}

struct Enumerator {
  const ScenarioMeta& meta;
  const EnumOptions& opts;
  std::map<std::pair<std::uint64_t, std::uint64_t>, NodeResult> memo;
  EnumReport report;
  std::vector<std::uint32_t> path;

  NodeResult visit(Simulation& sim) {
    if (opts.branch_messages_only) close_local(sim);
    auto key = sim.state_hash128();
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (memo.size() >= opts.state_bound)
      throw BoundExceeded("enumeration exceeded " +
                          std::to_string(opts.state_bound) + " states");

    auto fronts = opts.branch_messages_only ? message_fronts(sim)
                                            : sim.enabled_fronts();
    NodeResult res;
    if (fronts.empty()) {
      report.terminals++;
      res.paths = 1;
      if (!opts.properties.empty()) {
        Observations obs = sim.collect();
        for (const auto& prop : opts.properties) {
          CheckResult cr = check_property(prop, meta, obs);
          if (cr.verdict == Verdict::Violated) {
            report.violating_terminals[prop]++;
            if (!report.first_witness) report.first_witness = path;
          }
        }
      }
    } else {
      for (std::uint32_t i = 0; i < fronts.size(); ++i) {
        auto child = sim.clone();
        child->set_tracing(false);
        child->dispatch_seq(fronts[i]);
        report.transitions++;
        path.push_back(i);
        NodeResult sub = visit(*child);
        path.pop_back();
        if (!sub.exact) res.exact = false;
        res.paths = sat_add(res.paths, sub.paths, res.exact);
      }
    }
    memo.emplace(key, res);
    return res;
  }
};

}  // namespace

std::string u128_text(U128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v > 0) {
    out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return out;
}

std::string EnumReport::schedules_text() const {
  std::string out = u128_text(schedules);
  if (!schedules_exact) out += "+";
  return out;
}

EnumReport enumerate_schedules(const Simulation& root, const ScenarioMeta& meta,
                               const EnumOptions& opts) {
  auto start = root.clone();
  start->set_tracing(false);
  Enumerator e{meta, opts, {}, {}, {}};
  NodeResult res = e.visit(*start);
  e.report.schedules = res.paths;
  e.report.schedules_exact = res.exact;
  e.report.states = e.memo.size();
  return e.report;
}

std::unique_ptr<Simulation> replay_choices(
    const Simulation& root, const std::vector<std::uint32_t>& choices,
    bool branch_messages_only) {
  auto sim = root.clone();
  for (std::uint32_t idx : choices) {
    if (branch_messages_only) close_local(*sim);
    auto fronts = branch_messages_only ? message_fronts(*sim)
                                       : sim->enabled_fronts();
    if (idx >= fronts.size())
      throw InvalidParams("replay: choice index " + std::to_string(idx) +
                          " out of range");
    sim->dispatch_seq(fronts[idx]);
  }
  if (branch_messages_only) close_local(*sim);
  return sim;
}

void dispatch_starts(Simulation& sim) {
  if (sim.dispatched() != 0)
    throw InvalidParams("dispatch_starts wants a fresh simulation");
  // A fresh simulation holds exactly the start events, with sequence
  // numbers 0 .. n-1.
  for (ProcessId p = 0; p < sim.params().n; ++p) {
    auto entry = sim.dispatch_seq(p);
    if (!entry || entry->kind != TraceKind::Step)
      throw InvalidParams("dispatch_starts ran into a non-start event");
  }
}

}  // namespace unilab

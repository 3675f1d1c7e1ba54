#include "unilab/checkers.hpp"

#include <functional>

#include "unilab/rounds.hpp"
#include "unilab/trinc.hpp"
#include "unilab/util.hpp"

namespace unilab {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Satisfied:
      return "satisfied";
    case Verdict::Violated:
      return "violated";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

namespace {

bool correct(const Observations& obs, ProcessId p) {
  return !obs.procs.at(p).byzantine;
}

/// Liveness verdict for an unmet obligation: the run may simply not have
/// gotten there if links were withheld or the budget ran out.
Verdict unmet(const ScenarioMeta& meta, const Observations& obs) {
  if (meta.holds_present || obs.horizon_exceeded) return Verdict::Inconclusive;
  return Verdict::Violated;
}

std::string describe_round(std::uint64_t id) {
  std::string out;
  if (round_id::instance_of(id) == round_id::kPlainInstance) {
    out = "round " + std::to_string(round_id::seq_of(id));
  } else {
    out = "instance " + std::to_string(round_id::instance_of(id)) +
          " sequence " + std::to_string(round_id::seq_of(id)) + " phase " +
          std::to_string(round_id::phase_of(id));
  }
  return out;
}

std::string payload_text(const Payload& p) { return to_hex(p); }

// ------------------------------------------------------- unidirectional

CheckResult check_unidirectional(const ScenarioMeta&, const Observations& obs) {
  CheckResult res;
  auto pairs = unidirectional_violations(obs);
  if (!pairs.empty()) {
    res.verdict = Verdict::Violated;
    res.detail = "processes " + std::to_string(pairs.front().first) + " and " +
                 std::to_string(pairs.front().second) +
                 " both finished a common round without hearing from each "
                 "other";
  }
  return res;
}

// ---------------------------------------------------- round-termination

CheckResult check_round_termination(const ScenarioMeta& meta,
                                    const Observations& obs) {
  CheckResult res;
  for (ProcessId p = 0; p < obs.procs.size(); ++p) {
    if (!correct(obs, p)) continue;
    for (const auto& [rid, r] : obs.procs[p].rounds) {
      if (r.sent && !r.finished) {
        res.verdict = unmet(meta, obs);
        res.detail = "process " + std::to_string(p) + " never finished " +
                     describe_round(rid);
        return res;
      }
    }
  }
  return res;
}

// -------------------------------------------------------- broadcast p1-p4

CheckResult check_srb_p1(const ScenarioMeta& meta, const Observations& obs) {
  CheckResult res;
  for (ProcessId s = 0; s < obs.procs.size(); ++s) {
    if (!correct(obs, s)) continue;
    for (const auto& [k, m] : obs.procs[s].broadcasts) {
      for (ProcessId p = 0; p < obs.procs.size(); ++p) {
        if (!correct(obs, p)) continue;
        bool delivered = false;
        for (const auto& d : obs.procs[p].deliveries)
          if (d.sender == s && d.k == k && d.m == m) {
            delivered = true;
            break;
          }
        if (!delivered) {
          res.verdict = unmet(meta, obs);
          res.detail = "process " + std::to_string(p) +
                       " missing broadcast " + std::to_string(k) +
                       " from sender " + std::to_string(s);
          return res;
        }
      }
    }
  }
  return res;
}

CheckResult check_srb_p2(const ScenarioMeta& meta, const Observations& obs) {
  CheckResult res;
  for (ProcessId p = 0; p < obs.procs.size(); ++p) {
    if (!correct(obs, p)) continue;
    for (const auto& d : obs.procs[p].deliveries) {
      for (ProcessId q = 0; q < obs.procs.size(); ++q) {
        if (!correct(obs, q)) continue;
        bool seen = false;
        for (const auto& e : obs.procs[q].deliveries)
          if (e.sender == d.sender && e.k == d.k) {
            seen = true;
            break;
          }
        if (!seen) {
          res.verdict = unmet(meta, obs);
          res.detail = "process " + std::to_string(p) + " delivered (" +
                       std::to_string(d.sender) + ", " + std::to_string(d.k) +
                       ") but process " + std::to_string(q) + " did not";
          return res;
        }
      }
    }
  }
  return res;
}

CheckResult check_srb_p3(const ScenarioMeta&, const Observations& obs) {
  CheckResult res;
  // (sender, k) -> (first deliverer, payload)
  std::map<std::pair<ProcessId, std::uint64_t>, std::pair<ProcessId, Payload>>
      seen;
  for (ProcessId p = 0; p < obs.procs.size(); ++p) {
    if (!correct(obs, p)) continue;
    for (const auto& d : obs.procs[p].deliveries) {
      auto key = std::make_pair(d.sender, d.k);
      auto it = seen.find(key);
      if (it == seen.end()) {
        seen.emplace(key, std::make_pair(p, d.m));
      } else if (it->second.second != d.m) {
        res.verdict = Verdict::Violated;
        res.detail = "sequence " + std::to_string(d.k) + " of sender " +
                     std::to_string(d.sender) + ": process " +
                     std::to_string(it->second.first) + " delivered " +
                     payload_text(it->second.second) + ", process " +
                     std::to_string(p) + " delivered " + payload_text(d.m);
        return res;
      }
    }
  }
  return res;
}

CheckResult check_srb_p4(const ScenarioMeta&, const Observations& obs) {
  CheckResult res;
  for (ProcessId p = 0; p < obs.procs.size(); ++p) {
    if (!correct(obs, p)) continue;
    std::map<ProcessId, std::uint64_t> next;
    for (const auto& d : obs.procs[p].deliveries) {
      std::uint64_t want = next.count(d.sender) ? next[d.sender] : 1;
      if (d.k != want) {
        res.verdict = Verdict::Violated;
        res.detail = "process " + std::to_string(p) +
                     " delivered sequence " + std::to_string(d.k) +
                     " from sender " + std::to_string(d.sender) +
                     " where " + std::to_string(want) + " was expected";
        return res;
      }
      next[d.sender] = want + 1;
      if (correct(obs, d.sender)) {
        const auto& bl = obs.procs[d.sender].broadcasts;
        auto it = bl.find(d.k);
        if (it == bl.end() || it->second != d.m) {
          res.verdict = Verdict::Violated;
          res.detail = "process " + std::to_string(p) + " delivered (" +
                       std::to_string(d.sender) + ", " + std::to_string(d.k) +
                       ", " + payload_text(d.m) +
                       ") which that sender never broadcast";
          return res;
        }
      }
    }
  }
  return res;
}

CheckResult check_srb_agreement(const ScenarioMeta&, const Observations& obs) {
  CheckResult res;
  // Per sender, delivery sequences at correct processes must be prefixes
  // of one another, values included.
  for (ProcessId s = 0; s < obs.procs.size(); ++s) {
    std::vector<std::pair<ProcessId, std::vector<const DeliveryObs*>>> seqs;
    for (ProcessId p = 0; p < obs.procs.size(); ++p) {
      if (!correct(obs, p)) continue;
      std::vector<const DeliveryObs*> mine;
      for (const auto& d : obs.procs[p].deliveries)
        if (d.sender == s) mine.push_back(&d);
      seqs.emplace_back(p, std::move(mine));
    }
    for (std::size_t a = 0; a < seqs.size(); ++a) {
      for (std::size_t b = a + 1; b < seqs.size(); ++b) {
        const auto& [pa, da] = seqs[a];
        const auto& [pb, db] = seqs[b];
        std::size_t common = std::min(da.size(), db.size());
        for (std::size_t i = 0; i < common; ++i) {
          if (da[i]->k != db[i]->k || da[i]->m != db[i]->m) {
            res.verdict = Verdict::Violated;
            res.detail = "sender " + std::to_string(s) +
                         ": delivery sequences at processes " +
                         std::to_string(pa) + " and " + std::to_string(pb) +
                         " diverge at position " + std::to_string(i);
            return res;
          }
        }
      }
    }
  }
  return res;
}

// ----------------------------------------------------------- vwba checks

CheckResult check_vwba_agreement(const ScenarioMeta&, const Observations& obs) {
  CheckResult res;
  std::optional<std::pair<ProcessId, Payload>> first;
  for (ProcessId p = 0; p < obs.procs.size(); ++p) {
    if (!correct(obs, p) || !obs.procs[p].decided) continue;
    if (!obs.procs[p].decision) continue;  // bottom never conflicts
    if (!first) {
      first = std::make_pair(p, *obs.procs[p].decision);
    } else if (first->second != *obs.procs[p].decision) {
      res.verdict = Verdict::Violated;
      res.detail = "process " + std::to_string(first->first) + " decided " +
                   payload_text(first->second) + ", process " +
                   std::to_string(p) + " decided " +
                   payload_text(*obs.procs[p].decision);
      return res;
    }
  }
  return res;
}

CheckResult check_vwba_validity(const ScenarioMeta& meta,
                                const Observations& obs) {
  CheckResult res;
  if (!meta.byzantine.empty()) return res;
  std::optional<Payload> common;
  for (const auto& [p, input] : meta.inputs) {
    if (!common) {
      common = input;
    } else if (*common != input) {
      return res;  // inputs differ; nothing is owed
    }
  }
  if (!common) return res;
  for (ProcessId p = 0; p < obs.procs.size(); ++p) {
    if (!obs.procs[p].decided) {
      res.verdict = unmet(meta, obs);
      res.detail = "process " + std::to_string(p) + " never decided";
      return res;
    }
    if (!obs.procs[p].decision || *obs.procs[p].decision != *common) {
      res.verdict = Verdict::Violated;
      res.detail = "all inputs were " + payload_text(*common) + " but process " +
                   std::to_string(p) + " decided " +
                   (obs.procs[p].decision ? payload_text(*obs.procs[p].decision)
                                          : std::string("bottom"));
      return res;
    }
  }
  return res;
}

// ---------------------------------------------------------- counter checks

CheckResult check_trinc_liveness(const ScenarioMeta& meta,
                                 const Observations& obs) {
  CheckResult res;
  for (ProcessId q = 0; q < obs.procs.size(); ++q) {
    if (!correct(obs, q)) continue;
    for (const auto& a : obs.procs[q].attests) {
      for (ProcessId v = 0; v < obs.procs.size(); ++v) {
        if (!correct(obs, v)) continue;
        auto store = recompute_attestation_store(obs.procs[v]);
        auto qit = store.find(q);
        bool ok = false;
        if (qit != store.end()) {
          auto cit = qit->second.find(a.c);
          ok = cit != qit->second.end() && cit->second.first == a.k &&
               cit->second.second == a.m;
        }
        if (!ok) {
          res.verdict = unmet(meta, obs);
          res.detail = "attestation at counter " + std::to_string(a.c) +
                       " of holder " + std::to_string(q) +
                       " does not verify at process " + std::to_string(v);
          return res;
        }
      }
    }
  }
  return res;
}

CheckResult check_trinc_nonequiv(const ScenarioMeta&, const Observations& obs) {
  CheckResult res;
  // (holder, counter) -> (verifier, sequence, message)
  std::map<std::pair<ProcessId, std::uint64_t>,
           std::tuple<ProcessId, std::uint64_t, Payload>>
      seen;
  for (ProcessId v = 0; v < obs.procs.size(); ++v) {
    if (!correct(obs, v)) continue;
    auto store = recompute_attestation_store(obs.procs[v]);
    for (const auto& [q, by_c] : store) {
      for (const auto& [c, km] : by_c) {
        auto key = std::make_pair(q, c);
        auto it = seen.find(key);
        if (it == seen.end()) {
          seen.emplace(key, std::make_tuple(v, km.first, km.second));
        } else if (std::get<1>(it->second) != km.first ||
                   std::get<2>(it->second) != km.second) {
          res.verdict = Verdict::Violated;
          res.detail = "holder " + std::to_string(q) + " counter " +
                       std::to_string(c) + " binds different messages at " +
                       "processes " + std::to_string(std::get<0>(it->second)) +
                       " and " + std::to_string(v);
          return res;
        }
      }
    }
  }
  return res;
}

CheckResult check_trinc_soundness(const ScenarioMeta&,
                                  const Observations& obs) {
  CheckResult res;
  for (ProcessId v = 0; v < obs.procs.size(); ++v) {
    if (!correct(obs, v)) continue;
    auto store = recompute_attestation_store(obs.procs[v]);
    for (const auto& [q, by_c] : store) {
      if (q >= obs.procs.size() || !correct(obs, q)) continue;
      for (const auto& [c, km] : by_c) {
        bool issued = false;
        for (const auto& a : obs.procs[q].attests)
          if (a.c == c && a.k == km.first && a.m == km.second) {
            issued = true;
            break;
          }
        if (!issued) {
          res.verdict = Verdict::Violated;
          res.detail = "process " + std::to_string(v) +
                       " holds an attestation at counter " + std::to_string(c) +
                       " that holder " + std::to_string(q) + " never issued";
          return res;
        }
      }
    }
  }
  return res;
}

using PropertyFn = CheckResult (*)(const ScenarioMeta&, const Observations&);

const std::vector<std::pair<std::string, PropertyFn>>& registry() {
  static const std::vector<std::pair<std::string, PropertyFn>> table = {
      {"unidirectional", check_unidirectional},
      {"round-termination", check_round_termination},
      {"srb-p1", check_srb_p1},
      {"srb-p2", check_srb_p2},
      {"srb-p3", check_srb_p3},
      {"srb-p4", check_srb_p4},
      {"srb-agreement", check_srb_agreement},
      {"vwba-agreement", check_vwba_agreement},
      {"vwba-validity", check_vwba_validity},
      {"trinc-liveness", check_trinc_liveness},
      {"trinc-nonequiv", check_trinc_nonequiv},
      {"trinc-soundness", check_trinc_soundness},
  };
  return table;
}

}  // namespace

std::vector<std::pair<ProcessId, ProcessId>> unidirectional_violations(
    const Observations& obs) {
  std::set<std::pair<ProcessId, ProcessId>> found;
  std::set<std::uint64_t> round_ids;
  for (const auto& p : obs.procs)
    if (!p.byzantine)
      for (const auto& [rid, r] : p.rounds)
        if (r.sent) round_ids.insert(rid);
  for (std::uint64_t rid : round_ids) {
    for (ProcessId i = 0; i < obs.procs.size(); ++i) {
      if (obs.procs[i].byzantine) continue;
      auto ri = obs.procs[i].rounds.find(rid);
      if (ri == obs.procs[i].rounds.end()) continue;
      if (!ri->second.sent || !ri->second.finished) continue;
      for (ProcessId j = i + 1; j < obs.procs.size(); ++j) {
        if (obs.procs[j].byzantine) continue;
        auto rj = obs.procs[j].rounds.find(rid);
        if (rj == obs.procs[j].rounds.end()) continue;
        if (!rj->second.sent || !rj->second.finished) continue;
        if (!ri->second.received_from(j, true) &&
            !rj->second.received_from(i, true))
          found.emplace(i, j);
      }
    }
  }
  return std::vector<std::pair<ProcessId, ProcessId>>(found.begin(),
                                                      found.end());
}

void mark_byzantine(Observations& obs, const std::set<ProcessId>& byzantine) {
  for (ProcessId b : byzantine)
    if (b < obs.procs.size()) obs.procs[b].byzantine = true;
}

std::map<ProcessId,
         std::map<std::uint64_t, std::pair<std::uint64_t, Payload>>>
recompute_attestation_store(const ProcObs& verifier) {
  std::map<ProcessId,
           std::map<std::uint64_t, std::pair<std::uint64_t, Payload>>>
      store;
  std::map<ProcessId, std::uint64_t> highest;
  for (const auto& d : verifier.deliveries) {
    auto value = trinc_value_decode(d.m);
    if (!value) continue;
    auto [c, inner] = std::move(*value);
    std::uint64_t have = highest.count(d.sender) ? highest[d.sender] : 0;
    if (c <= have) continue;
    highest[d.sender] = c;
    store[d.sender].emplace(c, std::make_pair(d.k, std::move(inner)));
  }
  return store;
}

CheckResult check_property(const std::string& name, const ScenarioMeta& meta,
                           const Observations& obs) {
  for (const auto& [n, fn] : registry())
    if (n == name) return fn(meta, obs);
  throw SemanticError("unknown property '" + name + "'");
}

std::vector<std::string> property_names() {
  std::vector<std::string> out;
  for (const auto& [n, fn] : registry()) out.push_back(n);
  return out;
}

bool property_exists(const std::string& name) {
  for (const auto& [n, fn] : registry())
    if (n == name) return true;
  return false;
}

}  // namespace unilab

#include "mpicheck/l2.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "mpicheck/errors.hpp"
#include "mpicheck/smodel.hpp"

namespace mpicheck {
namespace {

bool infinite_string(const PowerString& s) { return s.size() == 1 && s.front().exp.is_infinite(); }

std::string solution_text(const RatioSolution& sol, const Program& names) {
  std::ostringstream out;
  for (std::size_t c = 0; c < sol.components.size(); ++c) {
    if (c > 0) out << ", ";
    const auto& comp = sol.components[c];
    for (std::size_t k = 0; k < comp.size(); ++k) out << (k ? ":" : "") << names.name_of(NodeId{comp[k]});
    out << " = ";
    for (std::size_t k = 0; k < comp.size(); ++k) out << (k ? ":" : "") << sol.value(comp[k]);
  }
  return out.str();
}

std::map<NodeId, std::string> snapshot_of(const PowerStrings& strings, bool whole) {
  std::map<NodeId, std::string> out;
  for (const auto& [id, s] : strings) {
    if (s.empty()) continue;
    out[id] = whole ? to_string(s) : to_string(s.front());
  }
  return out;
}

}  // namespace

PowerStrings to_power_strings(const Program& program) {
  PowerStrings out;
  for (const Node& n : program.nodes) out[n.id] = normalize(to_power_string(n.body));
  return out;
}

StripOutcome strip_outer_infinite(const PowerStrings& strings, const Program& names) {
  StripOutcome out;
  out.reg.label = "outer loops";

  std::vector<NodeCounts> counts;
  LoopTimes times;
  for (const auto& [id, s] : strings) {
    NodeCounts c{id, {}, {}};
    if (infinite_string(s)) {
      c.counts = body_counts(s.front());
      c.order = body_symbols(s.front());
      times.emplace(id, LoopCount::infinite());
    } else {
      for (const Power& p : s)
        if (p.exp.is_infinite())
          throw Error(ErrorKind::InfiniteNotSole, "infinite power must be the whole node string");
      c.counts = string_counts(s);
      c.order = string_symbols(s);
      times.emplace(id, LoopCount::finite(1));
    }
    counts.push_back(std::move(c));
  }

  auto reg = build_reg(counts, names);
  if (auto* unmatched = std::get_if<UnmatchedTotals>(&reg)) {
    out.deadlock = Verdict::deadlocked(*unmatched);
    return out;
  }
  out.reg.group = std::get<RatioEquationGroup>(reg);
  RegResult solved = solve(*out.reg.group);
  if (auto* bad = std::get_if<Inconsistent>(&solved)) {
    out.reg.inconsistent = *bad;
    out.deadlock = Verdict::deadlocked(
        RatioInconsistency{"ratio equation group has no solution: " + bad->explanation, bad->witness});
    return out;
  }
  out.reg.solution = std::get<RatioSolution>(solved);
  const RatioSolution& sol = *out.reg.solution;
  if (auto bad = ratio_consistent(sol, times, names)) {
    out.deadlock = Verdict::deadlocked(*bad);
    return out;
  }

  for (const auto& [id, s] : strings) {
    if (!infinite_string(s)) {
      out.strings[id] = s;
      continue;
    }
    std::uint64_t keep = sol.lcm_of_component(id.value) / sol.value(id.value);
    out.replication[id] = keep;
    Power body = s.front();
    body.exp = LoopCount::finite(keep);
    out.strings[id] = normalize({std::move(body)});
  }
  return out;
}

Fpp fpp(const PowerStrings& strings) {
  Fpp pool;
  for (const auto& [id, s] : strings)
    if (!s.empty()) pool.emplace(id, s.front());
  return pool;
}

RegStage pool_reg(const Fpp& pool, const Program& names) {
  RegStage out;
  out.label = "first power pool";
  std::vector<NodeCounts> counts;
  for (const auto& [id, p] : pool) counts.push_back(NodeCounts{id, body_counts(p), body_symbols(p)});
  auto holds = [&](NodeId node, const Symbol& s) {
    auto it = pool.find(node);
    return it != pool.end() && body_counts(it->second).count(s) > 0;
  };
  for (NodeCounts& c : counts) {
    std::erase_if(c.order, [&](const Symbol& s) { return !holds(s.src, s) || !holds(s.dst, s); });
    std::erase_if(c.counts, [&](const auto& kv) { return !holds(kv.first.src, kv.first) || !holds(kv.first.dst, kv.first); });
  }
  auto reg = build_reg(counts, names);
  out.group = std::get<RatioEquationGroup>(reg);
  RegResult solved = solve(*out.group);
  if (auto* s = std::get_if<RatioSolution>(&solved))
    out.solution = *s;
  else
    out.inconsistent = std::get<Inconsistent>(solved);
  return out;
}

std::vector<RelatedSet> related_sets(const Fpp& pool) {
  std::vector<NodeId> ids;
  std::vector<std::vector<Symbol>> syms;
  for (const auto& [id, p] : pool) {
    ids.push_back(id);
    syms.push_back(body_symbols(p));
  }
  const std::size_t n = ids.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<Symbol, std::size_t> first_holder;
  for (std::size_t k = 0; k < n; ++k) {
    for (const Symbol& s : syms[k]) {
      auto [it, fresh] = first_holder.emplace(s, k);
      if (!fresh) parent[find(k)] = find(it->second);
    }
  }

  std::map<std::size_t, RelatedSet> by_root;
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t r = find(k);
    auto [it, fresh] = by_root.try_emplace(r);
    if (fresh) order.push_back(r);
    it->second.members.push_back(ids[k]);
  }
  std::vector<RelatedSet> out;
  for (std::size_t r : order) {
    RelatedSet set = std::move(by_root.at(r));
    std::set<Symbol> seen;
    std::map<NodeId, std::set<Symbol>> holds;
    for (NodeId m : set.members) {
      std::size_t k = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), m) - ids.begin());
      for (const Symbol& s : syms[k]) {
        holds[m].insert(s);
        if (seen.insert(s).second) set.symbols.push_back(s);
      }
    }
    set.eligible = std::all_of(set.symbols.begin(), set.symbols.end(), [&](const Symbol& s) {
      return holds.count(s.src) && holds[s.src].count(s) && holds.count(s.dst) && holds[s.dst].count(s);
    });
    out.push_back(std::move(set));
  }
  return out;
}

AlignOutcome align_and_reduce(const RelatedSet& set, PowerStrings& strings, const Program& names,
                              const AnalysisOptions& options) {
  AlignOutcome out;
  if (!set.eligible) {
    out.note = "waiting: some message partner is still busy with an earlier power";
    return out;
  }
  std::vector<NodeCounts> counts;
  std::map<NodeId, const Power*> lead;
  for (NodeId m : set.members) {
    const Power& p = strings.at(m).front();
    if (p.exp.is_infinite()) throw Error(ErrorKind::InfiniteLoop, "infinite power in the first power pool");
    lead.emplace(m, &p);
    counts.push_back(NodeCounts{m, body_counts(p), body_symbols(p)});
  }

  auto reg = build_reg(counts, names);
  if (std::holds_alternative<UnmatchedTotals>(reg)) {
    out.note = "unmatched message inside the set";
    return out;
  }
  out.reg.label = "related set";
  out.reg.group = std::get<RatioEquationGroup>(reg);
  RegResult solved = solve(*out.reg.group);
  if (auto* bad = std::get_if<Inconsistent>(&solved)) {
    out.reg.inconsistent = *bad;
    out.note = "not expansible: " + bad->explanation;
    return out;
  }
  out.reg.solution = std::get<RatioSolution>(solved);
  const RatioSolution& sol = *out.reg.solution;

  std::uint64_t rounds = UINT64_MAX;
  for (NodeId m : set.members) {
    std::uint64_t u = sol.lcm_of_component(m.value) / sol.value(m.value);
    out.per_round[m] = u;
    rounds = std::min(rounds, lead.at(m)->exp.value() / u);
  }
  out.rounds = rounds;
  if (rounds == 0) {
    out.note = "misaligned: some power has fewer iterations than one balanced round";
    return out;
  }
  std::uint64_t round_events = 0;
  for (NodeId m : set.members) {
    std::uint64_t body = flatten_body(*lead.at(m), options.max_events).size();
    if (__builtin_mul_overflow(body, out.per_round.at(m), &body) ||
        __builtin_add_overflow(round_events, body, &round_events) || round_events > options.max_events)
      throw Error(ErrorKind::SizeExceeded, "one aligned round exceeds the event cap");
  }

  EventQueues round;
  for (NodeId m : set.members) {
    std::vector<Symbol> body = flatten_body(*lead.at(m), options.max_events);
    auto& q = round[m];
    for (std::uint64_t k = 0; k < out.per_round.at(m); ++k) q.insert(q.end(), body.begin(), body.end());
  }
  Verdict v = check_smodel(round, SModelOptions{options.verify});
  if (v.is_deadlock()) {
    out.kind = AlignOutcome::Kind::Deadlock;
    out.verdict = std::move(v);
    return out;
  }

  for (NodeId m : set.members) {
    PowerString& s = strings.at(m);
    std::uint64_t left = s.front().exp.value() - rounds * out.per_round.at(m);
    if (left == 0)
      s.erase(s.begin());
    else
      s.front().exp = LoopCount::finite(left);
    s = normalize(std::move(s));
  }
  out.kind = AlignOutcome::Kind::Progress;
  out.verdict = Verdict::free();
  return out;
}

L2Result check_l2(const Program& program, const AnalysisOptions& options) {
  L2Result result;
  result.normalized = to_power_strings(program);
  result.strip = strip_outer_infinite(result.normalized, program);
  result.regs.push_back(result.strip.reg);
  if (result.strip.deadlock) {
    result.verdict = *result.strip.deadlock;
    return result;
  }
  if (options.trace) {
    FppSnapshot s;
    s.pool = snapshot_of(result.strip.strings, true);
    s.actions.push_back("strings after removing outer infinite loops");
    result.trace.push_back(std::move(s));
  }

  PowerStrings strings = result.strip.strings;
  const std::uint64_t step_limit = std::max<std::uint64_t>(options.max_events, 1) * 4;
  for (std::uint64_t step = 0;; ++step) {
    if (step > step_limit) throw Error(ErrorKind::SizeExceeded, "power pool reduction exceeds the step cap");
    Fpp pool = fpp(strings);
    if (pool.empty()) {
      result.verdict = Verdict::free();
      return result;
    }
    FppSnapshot snap;
    if (options.trace) {
      snap.pool = snapshot_of(strings, false);
      RegStage reg = pool_reg(pool, program);
      if (reg.solution) snap.actions.push_back("pool ratios: " + solution_text(*reg.solution, program));
      result.regs.push_back(std::move(reg));
    }

    bool progressed = false;
    for (const RelatedSet& set : related_sets(pool)) {
      std::string who;
      for (NodeId m : set.members) who += (who.empty() ? "" : ",") + program.name_of(m);
      AlignOutcome step_result = align_and_reduce(set, strings, program, options);
      if (step_result.reg.solution) {
        step_result.reg.label = "related set {" + who + "}";
        if (options.trace) result.regs.push_back(step_result.reg);
      }
      if (options.trace) {
        std::ostringstream line;
        line << "{" << who << "}: ";
        switch (step_result.kind) {
          case AlignOutcome::Kind::Progress: {
            line << "reduced " << step_result.rounds << " round(s), solution "
                 << solution_text(*step_result.reg.solution, program) << ", per round";
            for (const auto& [m, u] : step_result.per_round) line << " " << program.name_of(m) << "x" << u;
            break;
          }
          case AlignOutcome::Kind::Deadlock:
            line << "one aligned round deadlocks";
            break;
          case AlignOutcome::Kind::NoProgress:
            line << step_result.note;
            break;
        }
        snap.actions.push_back(line.str());
      }
      if (step_result.kind == AlignOutcome::Kind::Deadlock) {
        if (options.trace) result.trace.push_back(std::move(snap));
        result.verdict = std::move(step_result.verdict);
        return result;
      }
      progressed = progressed || step_result.kind == AlignOutcome::Kind::Progress;
    }

    if (!progressed) {
      bool expanded = false;
      for (auto& [id, s] : strings) {
        if (s.empty() || s.front().is_atomic()) continue;
        PowerString head = expand_once(s.front());
        s.erase(s.begin());
        s.insert(s.begin(), head.begin(), head.end());
        expanded = true;
      }
      if (!expanded) {
        if (options.trace) {
          snap.actions.push_back("no related set is reducible or expansible");
          result.trace.push_back(std::move(snap));
        }
        FppStuck stuck;
        for (const auto& [id, s] : strings)
          if (!s.empty()) stuck.snapshot.emplace_back(id, to_string(s));
        result.verdict = Verdict::deadlocked(std::move(stuck));
        return result;
      }
      if (options.trace) snap.actions.push_back("no progress: expanded one iteration of each leading power");
    }
    if (options.trace) result.trace.push_back(std::move(snap));
  }
}

}  // namespace mpicheck

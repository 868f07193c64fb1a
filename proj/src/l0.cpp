#include "mpicheck/l0.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "mpicheck/errors.hpp"
#include "mpicheck/smodel.hpp"

namespace mpicheck {
namespace {

void collect_order(const Statements& body, std::vector<Symbol>& order, std::set<Symbol>& seen) {
  for (const Statement& s : body) {
    if (s.is_loop()) {
      collect_order(s.body, order, seen);
    } else if (seen.insert(s.sym).second) {
      order.push_back(s.sym);
    }
  }
}

std::string symbol_text(const Symbol& s, const Program& names) {
  return s.name + " (" + names.name_of(s.src) + "->" + names.name_of(s.dst) + ")";
}

bool has_loop(const Statements& body) {
  return std::any_of(body.begin(), body.end(), [](const Statement& s) { return s.is_loop(); });
}

}  // namespace

NodeCounts node_counts(NodeId node, const Statements& body) {
  NodeCounts out{node, count_occurrences(body), {}};
  std::set<Symbol> seen;
  collect_order(body, out.order, seen);
  return out;
}

std::variant<RatioEquationGroup, UnmatchedTotals> build_reg(const std::vector<NodeCounts>& nodes,
                                                            const Program& names) {
  RatioEquationGroup group;
  std::map<NodeId, const NodeCounts*> by_node;
  for (const NodeCounts& n : nodes) {
    group.add_var(n.node.value);
    by_node.emplace(n.node, &n);
  }
  auto count_in = [&](NodeId node, const Symbol& s) -> std::uint64_t {
    auto it = by_node.find(node);
    if (it == by_node.end()) return 0;
    auto c = it->second->counts.find(s);
    return c == it->second->counts.end() ? 0 : c->second;
  };

  std::set<Symbol> done;
  for (const NodeCounts& n : nodes) {
    for (const Symbol& s : n.order) {
      if (!done.insert(s).second) continue;
      std::uint64_t sends = count_in(s.src, s);
      std::uint64_t recvs = count_in(s.dst, s);
      if (sends == 0 || recvs == 0) return UnmatchedTotals{s, sends, recvs};
      if (s.src < s.dst)
        group.add(s.src.value, s.dst.value, sends, recvs, symbol_text(s, names));
      else
        group.add(s.dst.value, s.src.value, recvs, sends, symbol_text(s, names));
    }
  }
  return group;
}

bool L0View::canonical() const {
  return std::all_of(nodes.begin(), nodes.end(),
                     [](const auto& kv) { return kv.second.preamble.empty() && kv.second.postamble.empty(); });
}

std::optional<L0View> l0_view(const Program& program) {
  L0View view;
  for (const Node& n : program.nodes) {
    std::optional<std::size_t> loop_at;
    for (std::size_t k = 0; k < n.body.size(); ++k) {
      if (!n.body[k].is_loop()) continue;
      if (loop_at || has_loop(n.body[k].body)) return std::nullopt;
      loop_at = k;
    }
    if (!loop_at) return std::nullopt;
    L0Part part;
    part.preamble.assign(n.body.begin(), n.body.begin() + static_cast<std::ptrdiff_t>(*loop_at));
    part.count = n.body[*loop_at].count;
    part.body = n.body[*loop_at].body;
    part.postamble.assign(n.body.begin() + static_cast<std::ptrdiff_t>(*loop_at) + 1, n.body.end());
    view.nodes.emplace(n.id, std::move(part));
  }
  return view;
}

std::variant<RatioEquationGroup, UnmatchedTotals> build_l0_reg(const L0View& view, const Program& names) {
  std::vector<NodeCounts> counts;
  // follow program order so equations come out in first-appearance order
  for (const Node& n : names.nodes) {
    auto it = view.nodes.find(n.id);
    if (it != view.nodes.end()) counts.push_back(node_counts(n.id, it->second.body));
  }
  if (counts.size() != view.nodes.size()) {
    counts.clear();
    for (const auto& [id, part] : view.nodes) counts.push_back(node_counts(id, part.body));
  }
  return build_reg(counts, names);
}

std::optional<RatioInconsistency> ratio_consistent(const RatioSolution& solution, const LoopTimes& times,
                                                   const Program& names) {
  for (const auto& component : solution.components) {
    std::optional<unsigned __int128> expected;
    VarId first = component.front();
    for (VarId v : component) {
      auto t = times.find(NodeId{v});
      if (t == times.end()) throw std::out_of_range("no loop time for node " + names.name_of(NodeId{v}));
      unsigned __int128 product =
          t->second.is_infinite() ? 0 : static_cast<unsigned __int128>(solution.value(v)) * t->second.value();
      if (!expected) {
        expected = product;
        continue;
      }
      if (*expected == product) continue;
      auto describe_one = [&](VarId x) {
        const LoopCount& lt = times.at(NodeId{x});
        std::ostringstream o;
        o << "p" << x << " * t" << x << " = " << solution.value(x) << " * "
          << (lt.is_infinite() ? std::string("inf(0)") : std::to_string(lt.value())) << " = "
          << (lt.is_infinite() ? 0ULL : static_cast<unsigned long long>(solution.value(x) * lt.value()));
        return o.str();
      };
      RatioInconsistency bad;
      bad.reason = "loop times are not ratio consistent between " + names.name_of(NodeId{first}) + " and " +
                   names.name_of(NodeId{v}) + ": " + describe_one(first) + " but " + describe_one(v);
      return bad;
    }
  }
  return std::nullopt;
}

Program slice(const L0View& view, const RatioSolution& solution, const Program& original) {
  Program out;
  out.names = original.names;
  for (const Node& n : original.nodes) {
    auto it = view.nodes.find(n.id);
    if (it == view.nodes.end()) {
      out.nodes.push_back(n);
      continue;
    }
    const L0Part& part = it->second;
    std::uint64_t times = solution.lcm_of_component(n.id.value) / solution.value(n.id.value);
    Node sliced{n.id, part.preamble};
    sliced.body.push_back(Statement::loop(LoopCount::finite(times), part.body));
    sliced.body.insert(sliced.body.end(), part.postamble.begin(), part.postamble.end());
    out.nodes.push_back(std::move(sliced));
  }
  return out;
}

std::optional<UnmatchedTotals> unbalanced_symbol(const Program& program) {
  std::map<Symbol, std::pair<std::uint64_t, std::uint64_t>> totals;
  std::vector<Symbol> order;
  for (const Node& n : program.nodes) {
    NodeCounts c = node_counts(n.id, n.body);
    for (const Symbol& s : c.order) {
      auto [it, fresh] = totals.try_emplace(s, 0, 0);
      if (fresh) order.push_back(s);
      (n.id == s.src ? it->second.first : it->second.second) += c.counts.at(s);
    }
  }
  for (const Symbol& s : order) {
    auto [sends, recvs] = totals.at(s);
    if (sends != recvs) return UnmatchedTotals{s, sends, recvs};
  }
  return std::nullopt;
}

L0Result check_l0(const Program& program, const AnalysisOptions& options) {
  std::optional<L0View> view = l0_view(program);
  if (!view || !view->canonical())
    throw Error(ErrorKind::NotApplicable, "program is not a single-loop (L0) program with one loop per node");

  L0Result result;
  auto reg = build_l0_reg(*view, program);
  if (auto* unmatched = std::get_if<UnmatchedTotals>(&reg)) {
    result.verdict = Verdict::deadlocked(*unmatched);
    return result;
  }
  result.trace.group = std::get<RatioEquationGroup>(reg);

  RegResult solved = solve(*result.trace.group);
  if (auto* bad = std::get_if<Inconsistent>(&solved)) {
    result.verdict = Verdict::deadlocked(RatioInconsistency{"ratio equation group has no solution: " + bad->explanation,
                                                            bad->witness});
    return result;
  }
  result.trace.solution = std::get<RatioSolution>(solved);
  const RatioSolution& solution = *result.trace.solution;

  LoopTimes times;
  for (const auto& [id, part] : view->nodes) times.emplace(id, part.count);
  if (auto bad = ratio_consistent(solution, times, program)) {
    result.verdict = Verdict::deadlocked(*bad);
    return result;
  }

  Program sliced = slice(*view, solution, program);
  if (auto off = unbalanced_symbol(sliced))
    throw Error(ErrorKind::InternalDisagreement, "sliced program is unbalanced for message " + off->sym.name);
  for (const Node& n : sliced.nodes) result.trace.sliced_times[n.id] = n.body.front().count.value();

  result.trace.smodel = unroll(sliced, options.max_events);
  result.verdict = check_smodel(*result.trace.smodel, SModelOptions{options.verify});
  return result;
}

}  // namespace mpicheck

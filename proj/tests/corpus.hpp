#pragma once

// Random program generator shared by the property and acceptance tests.
// Most programs are projections of a global rendezvous schedule (so a fair
// share is deadlock-free), optionally perturbed; the rest are unstructured.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mpicheck/errors.hpp"
#include "mpicheck/model.hpp"
#include "mpicheck/power.hpp"

namespace corpus {

using namespace mpicheck;

struct Limits {
  std::uint32_t max_nodes = 4;
  std::size_t max_events = 12;  // sends and receives written in one node
  std::uint64_t max_count = 4;
  int max_depth = 2;
};

inline std::uint64_t pick(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

inline bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

inline Symbol random_symbol(std::mt19937_64& rng, std::uint32_t nodes) {
  static const char* const names[] = {"a", "b", "c", "d"};
  std::uint32_t src = static_cast<std::uint32_t>(pick(rng, 0, nodes - 1));
  std::uint32_t dst = static_cast<std::uint32_t>(pick(rng, 0, nodes - 2));
  if (dst >= src) ++dst;
  return Symbol{names[pick(rng, 0, 3)], NodeId{src}, NodeId{dst}};
}

struct Step {
  bool loop = false;
  Symbol sym;
  std::uint64_t count = 1;
  std::vector<Step> body;
};

inline std::vector<Step> random_schedule(std::mt19937_64& rng, std::uint32_t nodes, int depth, const Limits& lim) {
  std::vector<Step> out;
  const std::uint64_t len = pick(rng, 1, depth == 0 ? 5 : 3);
  for (std::uint64_t k = 0; k < len; ++k) {
    Step s;
    if (depth < lim.max_depth && coin(rng, 0.35)) {
      s.loop = true;
      s.count = pick(rng, 1, lim.max_count);
      s.body = random_schedule(rng, nodes, depth + 1, lim);
    } else {
      s.sym = random_symbol(rng, nodes);
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline Statements project(const std::vector<Step>& steps, NodeId node) {
  Statements out;
  for (const Step& s : steps) {
    if (s.loop) {
      Statements body = project(s.body, node);
      if (!body.empty()) out.push_back(Statement::loop(LoopCount::finite(s.count), std::move(body)));
    } else if (s.sym.src == node) {
      out.push_back(Statement::send(s.sym));
    } else if (s.sym.dst == node) {
      out.push_back(Statement::recv(s.sym));
    }
  }
  return out;
}

inline std::size_t written_events(const Statements& body) {
  std::size_t n = 0;
  for (const Statement& st : body) n += st.is_loop() ? written_events(st.body) : 1;
  return n;
}

// Nesting depth of finite loops; an outer infinite loop does not count.
inline int depth_of(const Statements& body) {
  int d = 0;
  for (const Statement& st : body)
    if (st.is_loop()) d = std::max(d, (st.count.is_infinite() ? 0 : 1) + depth_of(st.body));
  return d;
}

// Every statement list in the tree, for picking a mutation site.
inline void collect_lists(Statements& body, std::vector<Statements*>& out) {
  out.push_back(&body);
  for (Statement& st : body)
    if (st.is_loop()) collect_lists(st.body, out);
}

inline Statement random_event(std::mt19937_64& rng, NodeId node, std::uint32_t nodes) {
  Symbol s = random_symbol(rng, nodes);
  if (coin(rng, 0.5)) {
    if (s.src != node) {
      if (s.dst == node) s.dst = s.src;
      s.src = node;
    }
    return Statement::send(s);
  }
  if (s.dst != node) {
    if (s.src == node) s.src = s.dst;
    s.dst = node;
  }
  return Statement::recv(s);
}

inline void drop_empty_loops(Statements& body) {
  for (Statement& st : body)
    if (st.is_loop()) drop_empty_loops(st.body);
  std::erase_if(body, [](const Statement& st) { return st.is_loop() && st.body.empty(); });
}

// One random edit of one node. Some edits preserve behavior (unrolling or
// splitting a loop), the others usually break the schedule.
inline void mutate(std::mt19937_64& rng, Program& p, const Limits& lim) {
  Node& node = p.nodes[pick(rng, 0, p.nodes.size() - 1)];
  std::vector<Statements*> lists;
  collect_lists(node.body, lists);
  Statements& list = *lists[pick(rng, 0, lists.size() - 1)];
  const auto nodes = static_cast<std::uint32_t>(p.nodes.size());
  switch (pick(rng, 0, 5)) {
    case 0:
      if (list.size() >= 2) {
        std::size_t i = pick(rng, 0, list.size() - 2);
        std::swap(list[i], list[i + 1]);
      }
      break;
    case 1:
      for (Statement& st : list)
        if (st.is_loop()) {
          st.count = LoopCount::finite(pick(rng, 1, lim.max_count));
          break;
        }
      break;
    case 2:
      if (!list.empty()) list.erase(list.begin() + static_cast<long>(pick(rng, 0, list.size() - 1)));
      break;
    case 3:
      list.insert(list.begin() + static_cast<long>(pick(rng, 0, list.size())), random_event(rng, node.id, nodes));
      break;
    case 4:
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (!list[i].is_loop()) continue;
        Statement loop = list[i];
        list.erase(list.begin() + static_cast<long>(i));
        for (std::uint64_t k = 0; k < loop.count.value(); ++k)
          list.insert(list.begin() + static_cast<long>(i), loop.body.begin(), loop.body.end());
        break;
      }
      break;
    case 5:
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (!list[i].is_loop() || list[i].count.value() < 2) continue;
        std::uint64_t n = list[i].count.value();
        std::uint64_t first = pick(rng, 1, n - 1);
        Statement second = list[i];
        list[i].count = LoopCount::finite(first);
        second.count = LoopCount::finite(n - first);
        list.insert(list.begin() + static_cast<long>(i) + 1, second);
        break;
      }
      break;
  }
  drop_empty_loops(node.body);
}

inline Statements random_body(std::mt19937_64& rng, NodeId node, std::uint32_t nodes, int depth, const Limits& lim) {
  Statements out;
  const std::uint64_t len = pick(rng, depth == 0 ? 0 : 1, depth == 0 ? 5 : 3);
  for (std::uint64_t k = 0; k < len; ++k) {
    if (depth < lim.max_depth && coin(rng, 0.3))
      out.push_back(Statement::loop(LoopCount::finite(pick(rng, 1, lim.max_count)),
                                    random_body(rng, node, nodes, depth + 1, lim)));
    else
      out.push_back(random_event(rng, node, nodes));
  }
  return out;
}

inline bool within_limits(const Program& p, const Limits& lim) {
  for (const Node& n : p.nodes)
    if (written_events(n.body) > lim.max_events || depth_of(n.body) > lim.max_depth) return false;
  try {
    validate(p);
  } catch (const Error&) {
    return false;
  }
  return true;
}

inline void wrap_infinite(Program& p) {
  for (Node& n : p.nodes)
    if (!n.body.empty()) n.body = Statements{Statement::loop(LoopCount::infinite(), std::move(n.body))};
}

enum class Flavor { Schedule, Mutated, Unstructured, SingleLoop };

// One loop per node around a flat schedule projection. Nodes may repeat
// their body inside the loop, and counts are sometimes perturbed.
inline Program single_loop_program(std::mt19937_64& rng, std::uint32_t nodes, bool infinite, const Limits& lim) {
  Limits flat = lim;
  flat.max_depth = 0;
  std::vector<Step> schedule = random_schedule(rng, nodes, 0, flat);
  const std::uint64_t rounds = pick(rng, 1, lim.max_count);
  Program p;
  for (std::uint32_t k = 0; k < nodes; ++k) {
    Statements body = project(schedule, NodeId{k});
    Node n{NodeId{k}, {}};
    if (!body.empty()) {
      std::uint64_t count = rounds;
      if (count % 2 == 0 && coin(rng, 0.3)) {
        Statements twice = body;
        twice.insert(twice.end(), body.begin(), body.end());
        body = std::move(twice);
        count /= 2;
      }
      if (coin(rng, 0.15)) count = pick(rng, 1, lim.max_count);
      if (coin(rng, 0.15) && body.size() >= 2) std::swap(body[0], body[1]);
      n.body.push_back(Statement::loop(infinite ? LoopCount::infinite() : LoopCount::finite(count), std::move(body)));
    }
    p.nodes.push_back(std::move(n));
  }
  return p;
}

inline Program random_program(std::mt19937_64& rng, Flavor flavor, bool infinite, const Limits& lim = {}) {
  for (;;) {
    const auto nodes = static_cast<std::uint32_t>(pick(rng, 2, lim.max_nodes));
    Program p;
    if (flavor == Flavor::SingleLoop) {
      p = single_loop_program(rng, nodes, infinite, lim);
    } else if (flavor == Flavor::Unstructured) {
      for (std::uint32_t k = 0; k < nodes; ++k)
        p.nodes.push_back(Node{NodeId{k}, random_body(rng, NodeId{k}, nodes, 0, lim)});
    } else {
      std::vector<Step> schedule = random_schedule(rng, nodes, 0, lim);
      for (std::uint32_t k = 0; k < nodes; ++k) p.nodes.push_back(Node{NodeId{k}, project(schedule, NodeId{k})});
      if (flavor == Flavor::Mutated) {
        const std::uint64_t edits = pick(rng, 1, 2);
        for (std::uint64_t k = 0; k < edits; ++k) mutate(rng, p, lim);
      }
    }
    for (std::uint32_t k = 0; k < nodes; ++k) p.names.push_back("P" + std::to_string(k));
    if (infinite && flavor != Flavor::SingleLoop) wrap_infinite(p);
    if (within_limits(p, lim)) return p;
  }
}

// Deterministic corpus: schedules, mutated schedules, single-loop and
// unstructured programs, each with and without outer infinite loops.
inline std::vector<Program> make_corpus(std::uint64_t seed, std::size_t count) {
  static const Flavor mix[] = {Flavor::Schedule, Flavor::Mutated,    Flavor::SingleLoop,
                               Flavor::Mutated,  Flavor::SingleLoop, Flavor::Unstructured};
  std::mt19937_64 rng(seed);
  std::vector<Program> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Flavor flavor = mix[k % 6];
    const bool infinite = (k / 6) % 5 < 2;
    out.push_back(random_program(rng, flavor, infinite));
  }
  return out;
}

// Random finite power string over a three-letter alphabet between two
// nodes; small enough to unroll.
inline PowerString random_power_string(std::mt19937_64& rng, int depth = 0) {
  static const Symbol alphabet[] = {{"a", NodeId{0}, NodeId{1}}, {"b", NodeId{0}, NodeId{1}}, {"c", NodeId{1}, NodeId{0}}};
  PowerString out;
  const std::uint64_t len = pick(rng, 1, depth == 0 ? 4 : 3);
  for (std::uint64_t k = 0; k < len; ++k) {
    const LoopCount exp = LoopCount::finite(pick(rng, 1, 3));
    if (depth < 2 && coin(rng, 0.4)) {
      out.push_back(Power::group(random_power_string(rng, depth + 1), exp));
    } else {
      std::vector<Symbol> lits;
      const std::uint64_t n = pick(rng, 1, 3);
      for (std::uint64_t i = 0; i < n; ++i) lits.push_back(alphabet[pick(rng, 0, 2)]);
      out.push_back(Power::literal(std::move(lits), exp));
    }
  }
  return out;
}

// Random S-Model queues with balanced or unbalanced totals.
inline EventQueues random_queues(std::mt19937_64& rng, std::uint32_t nodes, std::size_t events) {
  EventQueues q;
  for (std::uint32_t k = 0; k < nodes; ++k) q[NodeId{k}];
  for (std::size_t k = 0; k < events; ++k) {
    Symbol s = random_symbol(rng, nodes);
    auto& a = q[s.src];
    auto& b = q[s.dst];
    a.insert(a.begin() + static_cast<long>(pick(rng, 0, a.size())), s);
    b.insert(b.begin() + static_cast<long>(pick(rng, 0, b.size())), s);
  }
  return q;
}

}  // namespace corpus

#include "mpicheck/smodel.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <unordered_map>

#include "mpicheck/errors.hpp"

namespace mpicheck {
namespace {

struct PairKey {
  Symbol sym;
  std::uint32_t instance;
  friend auto operator<=>(const PairKey&, const PairKey&) = default;
};

}  // namespace

Verdict check_by_queues(const EventQueues& queues, const QueueOptions& options) {
  // Dense indexing of nodes; fronts tracked by position.
  std::vector<const std::vector<Symbol>*> q;
  std::unordered_map<std::uint32_t, std::size_t> slot;
  std::vector<NodeId> ids;
  for (const auto& [id, events] : queues) {
    slot.emplace(id.value, q.size());
    q.push_back(&events);
    ids.push_back(id);
  }
  std::vector<std::size_t> pos(q.size(), 0);

  std::vector<std::size_t> work(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) work[k] = k;
  std::mt19937_64 rng(options.shuffle_seed.value_or(0));

  while (!work.empty()) {
    std::size_t n;
    if (options.shuffle_seed) {
      std::size_t pick = std::uniform_int_distribution<std::size_t>(0, work.size() - 1)(rng);
      std::swap(work[pick], work.back());
    }
    n = work.back();
    work.pop_back();
    if (pos[n] >= q[n]->size()) continue;
    const Symbol& s = (*q[n])[pos[n]];
    NodeId partner_id = ids[n] == s.src ? s.dst : s.src;
    auto it = slot.find(partner_id.value);
    if (it == slot.end()) continue;
    std::size_t m = it->second;
    if (pos[m] >= q[m]->size() || (*q[m])[pos[m]] != s) continue;
    ++pos[n];
    ++pos[m];
    work.push_back(n);
    work.push_back(m);
  }

  StuckQueues stuck;
  bool any = false;
  for (std::size_t k = 0; k < q.size(); ++k) {
    auto& rest = stuck.remaining[ids[k]];
    rest.assign(q[k]->begin() + static_cast<std::ptrdiff_t>(pos[k]), q[k]->end());
    any = any || !rest.empty();
  }
  if (!any) return Verdict::free();
  return Verdict::deadlocked(std::move(stuck));
}

std::size_t Mdg::edge_count() const {
  std::size_t n = 0;
  for (const auto& s : successors) n += s.size();
  return n;
}

Mdg build_mdg(const EventQueues& queues) {
  struct Side {
    NodeId node;
    std::size_t position;
  };
  struct Ends {
    std::optional<Side> send;
    std::optional<Side> recv;
  };
  std::map<PairKey, Ends> ends;
  // per node: the pair key of every event, in order
  std::map<NodeId, std::vector<PairKey>> keyed;
  for (const auto& [id, events] : queues) {
    std::unordered_map<Symbol, std::uint32_t, SymbolHash> seen;
    auto& keys = keyed[id];
    for (std::size_t p = 0; p < events.size(); ++p) {
      const Symbol& s = events[p];
      PairKey key{s, seen[s]++};
      Ends& e = ends[key];
      (id == s.src ? e.send : e.recv) = Side{id, p};
      keys.push_back(std::move(key));
    }
  }

  Mdg g;
  std::map<PairKey, std::uint32_t> index;
  for (const auto& [key, e] : ends) {
    if (e.send && e.recv) {
      index.emplace(key, static_cast<std::uint32_t>(g.pairs.size()));
      g.pairs.push_back(MatchedPair{key.sym, key.instance});
    } else {
      const Side& side = e.send ? *e.send : *e.recv;
      g.unpaired.push_back(UnpairedEvent{side.node, side.position, key.sym});
    }
  }
  std::sort(g.unpaired.begin(), g.unpaired.end(), [](const UnpairedEvent& a, const UnpairedEvent& b) {
    return std::tie(a.node, a.position) < std::tie(b.node, b.position);
  });

  g.successors.assign(g.pairs.size(), {});
  for (const auto& [id, keys] : keyed) {
    std::optional<std::uint32_t> prev;
    for (const PairKey& k : keys) {
      auto it = index.find(k);
      if (it == index.end()) continue;
      if (prev) g.successors[*prev].push_back(it->second);
      prev = it->second;
    }
  }
  for (auto& s : g.successors) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  return g;
}

std::optional<std::vector<std::uint32_t>> find_cycle(const Mdg& mdg) {
  const std::size_t n = mdg.pairs.size();
  enum : std::uint8_t { White, Grey, Black };
  std::vector<std::uint8_t> color(n, White);
  std::vector<std::uint32_t> parent(n, 0);
  std::vector<std::pair<std::uint32_t, std::size_t>> stack;

  for (std::uint32_t start = 0; start < n; ++start) {
    if (color[start] != White) continue;
    stack.push_back({start, 0});
    color[start] = Grey;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next == mdg.successors[v].size()) {
        color[v] = Black;
        stack.pop_back();
        continue;
      }
      std::uint32_t w = mdg.successors[v][next++];
      if (color[w] == White) {
        color[w] = Grey;
        parent[w] = v;
        stack.push_back({w, 0});
      } else if (color[w] == Grey) {
        std::vector<std::uint32_t> cycle{w};
        for (std::uint32_t x = v; x != w; x = parent[x]) cycle.push_back(x);
        std::reverse(cycle.begin() + 1, cycle.end());
        return cycle;
      }
    }
  }
  return std::nullopt;
}

std::optional<DeadlockWitness> find_deadlock_cycle(const Mdg& mdg) {
  if (auto cycle = find_cycle(mdg)) {
    MdgCycle w;
    for (std::uint32_t k : *cycle) w.pairs.push_back(mdg.pairs[k]);
    return w;
  }
  if (mdg.unpaired.empty()) return std::nullopt;
  const UnpairedEvent& first = mdg.unpaired.front();
  UnmatchedTotals w{first.sym, 0, 0};
  for (const MatchedPair& p : mdg.pairs) {
    if (p.sym == first.sym) {
      ++w.sends;
      ++w.recvs;
    }
  }
  for (const UnpairedEvent& u : mdg.unpaired) {
    if (u.sym != first.sym) continue;
    if (u.node == u.sym.src)
      ++w.sends;
    else
      ++w.recvs;
  }
  return w;
}

Verdict check_smodel(const EventQueues& queues, const SModelOptions& options) {
  Verdict by_queues = check_by_queues(queues);
  if (!by_queues.is_deadlock() && !options.verify) return by_queues;

  std::optional<DeadlockWitness> by_graph = find_deadlock_cycle(build_mdg(queues));
  if (by_queues.is_deadlock() != by_graph.has_value())
    throw Error(ErrorKind::InternalDisagreement,
                std::string("queue matcher says ") + (by_queues.is_deadlock() ? "deadlock" : "deadlock-free") +
                    " but the MDG says " + (by_graph ? "deadlock" : "deadlock-free"));
  if (by_graph) return Verdict::deadlocked(*by_graph);
  return by_queues;
}

}  // namespace mpicheck

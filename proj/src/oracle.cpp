#include "mpicheck/oracle.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <stdexcept>
#include <unordered_set>

namespace mpicheck {

Simulator::Simulator(const Program& program) : names_(&program) {
  for (const Node& n : program.nodes) {
    CompiledNode c;
    c.id = n.id;
    compile(c, n.body);
    c.code.push_back(Instr{Instr::Op::End, {}, 0, 0, 0});
    c.offset = width_;
    width_ += 1 + c.slots;
    nodes_.push_back(std::move(c));
  }
}

void Simulator::compile(CompiledNode& node, const Statements& body) {
  for (const Statement& st : body) {
    switch (st.kind) {
      case Statement::Kind::Send:
        node.code.push_back(Instr{Instr::Op::Send, st.sym, 0, 0, 0});
        break;
      case Statement::Kind::Recv:
        node.code.push_back(Instr{Instr::Op::Recv, st.sym, 0, 0, 0});
        break;
      case Statement::Kind::Loop: {
        const std::uint64_t count = st.count.is_infinite() ? 0 : st.count.value();
        const std::size_t slot = node.slots++;
        const std::size_t head = node.code.size();
        node.code.push_back(Instr{Instr::Op::Head, {}, count, slot, 0});
        compile(node, st.body);
        node.code.push_back(Instr{Instr::Op::Tail, {}, count, slot, head + 1});
        break;
      }
    }
  }
}

void Simulator::settle(const CompiledNode& node, std::uint64_t* w) const {
  for (;;) {
    const Instr& in = node.code[w[0]];
    if (in.op == Instr::Op::Head) {
      if (in.count != 0) w[1 + in.slot] = in.count;
      ++w[0];
    } else if (in.op == Instr::Op::Tail) {
      if (in.count == 0) {
        w[0] = in.target;
      } else if (--w[1 + in.slot] > 0) {
        w[0] = in.target;
      } else {
        ++w[0];
      }
    } else {
      return;
    }
  }
}

GlobalState Simulator::initial() const {
  GlobalState s{std::vector<std::uint64_t>(width_, 0)};
  for (const CompiledNode& n : nodes_) settle(n, s.words.data() + n.offset);
  return s;
}

const Simulator::Instr& Simulator::current(std::size_t node, const GlobalState& s) const {
  const CompiledNode& n = nodes_[node];
  return n.code[s.words[n.offset]];
}

std::size_t Simulator::index_of(NodeId id) const {
  for (std::size_t k = 0; k < nodes_.size(); ++k)
    if (nodes_[k].id == id) return k;
  return nodes_.size();
}

std::vector<Symbol> Simulator::enabled(const GlobalState& state) const {
  std::vector<Symbol> out;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const Instr& in = current(k, state);
    if (in.op != Instr::Op::Send) continue;
    std::size_t peer = index_of(in.sym.dst);
    if (peer == nodes_.size()) continue;
    const Instr& other = current(peer, state);
    if (other.op == Instr::Op::Recv && other.sym == in.sym) out.push_back(in.sym);
  }
  return out;
}

GlobalState Simulator::fire(const GlobalState& state, const Symbol& sym) const {
  std::size_t a = index_of(sym.src);
  std::size_t b = index_of(sym.dst);
  if (a == nodes_.size() || b == nodes_.size()) throw std::logic_error("rendezvous between unknown nodes");
  const Instr& x = current(a, state);
  const Instr& y = current(b, state);
  if (x.op != Instr::Op::Send || y.op != Instr::Op::Recv || x.sym != sym || y.sym != sym)
    throw std::logic_error("rendezvous on " + sym.name + " is not enabled");
  GlobalState next = state;
  for (std::size_t k : {a, b}) {
    std::uint64_t* w = next.words.data() + nodes_[k].offset;
    ++w[0];
    settle(nodes_[k], w);
  }
  return next;
}

bool Simulator::terminated(const GlobalState& state, std::size_t node_index) const {
  return current(node_index, state).op == Instr::Op::End;
}

bool Simulator::all_terminated(const GlobalState& state) const {
  for (std::size_t k = 0; k < nodes_.size(); ++k)
    if (!terminated(state, k)) return false;
  return true;
}

bool Simulator::stuck(const GlobalState& state) const { return !all_terminated(state) && enabled(state).empty(); }

std::vector<std::string> Simulator::describe(const GlobalState& state) const {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const Instr& in = current(k, state);
    std::string line = names_->name_of(nodes_[k].id) + ": ";
    if (in.op == Instr::Op::End)
      line += "done";
    else if (in.op == Instr::Op::Send)
      line += "send " + in.sym.name + " to " + names_->name_of(in.sym.dst);
    else
      line += "recv " + in.sym.name + " from " + names_->name_of(in.sym.src);
    out.push_back(std::move(line));
  }
  return out;
}

const char* to_string(OracleVerdict::Kind kind) {
  switch (kind) {
    case OracleVerdict::Kind::DeadlockReachable: return "deadlock";
    case OracleVerdict::Kind::DeadlockFree: return "deadlock-free";
    case OracleVerdict::Kind::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

// States live back to back in one flat buffer; the set stores their indices.
struct StateStore {
  std::size_t width;
  std::vector<std::uint64_t> flat;

  const std::uint64_t* at(std::uint32_t i) const { return flat.data() + static_cast<std::size_t>(i) * width; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(width == 0 ? 0 : flat.size() / width); }
};

struct StateHash {
  const StateStore* store;
  std::size_t operator()(std::uint32_t i) const noexcept {
    const std::uint64_t* w = store->at(i);
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t k = 0; k < store->width; ++k) {
      h ^= w[k] + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

struct StateEq {
  const StateStore* store;
  bool operator()(std::uint32_t a, std::uint32_t b) const noexcept {
    return std::equal(store->at(a), store->at(a) + store->width, store->at(b));
  }
};

}  // namespace

OracleVerdict explore(const Program& program, std::size_t max_states) {
  Simulator sim(program);
  const std::size_t nodes = sim.node_count();
  GlobalState init = sim.initial();

  StateStore store{init.words.size(), {}};
  // A zero-width state (no nodes) is impossible for validated programs, but
  // keep one word so indexing stays well defined.
  if (store.width == 0) store.width = 1, init.words.assign(1, 0);

  std::unordered_set<std::uint32_t, StateHash, StateEq> seen(1024, StateHash{&store}, StateEq{&store});
  struct Parent {
    std::uint32_t from;
    Symbol via;
  };
  std::vector<Parent> parent;
  std::vector<std::vector<std::uint32_t>> preds;
  std::vector<std::vector<bool>> moves_now(nodes);  // node -> state -> participates in an enabled rendezvous

  auto load = [&](std::uint32_t i) {
    GlobalState s;
    s.words.assign(store.at(i), store.at(i) + store.width);
    return s;
  };

  store.flat = init.words;
  seen.insert(0);
  parent.push_back(Parent{0, {}});
  preds.emplace_back();

  std::optional<std::uint32_t> first_stuck;
  bool truncated = false;

  auto index_of = [&](NodeId id) {
    for (std::size_t k = 0; k < nodes; ++k)
      if (sim.node_id(k) == id) return k;
    return nodes;
  };

  for (std::uint32_t cur = 0; cur < store.size(); ++cur) {
    GlobalState s = load(cur);
    std::vector<Symbol> en = sim.enabled(s);
    for (std::size_t k = 0; k < nodes; ++k) moves_now[k].push_back(false);
    for (const Symbol& sym : en) {
      moves_now[index_of(sym.src)][cur] = true;
      moves_now[index_of(sym.dst)][cur] = true;
    }
    if (en.empty() && !sim.all_terminated(s) && !first_stuck) first_stuck = cur;
    for (const Symbol& sym : en) {
      GlobalState t = sim.fire(s, sym);
      std::uint32_t candidate = store.size();
      store.flat.insert(store.flat.end(), t.words.begin(), t.words.end());
      auto [it, fresh] = seen.insert(candidate);
      if (!fresh) {
        store.flat.resize(store.flat.size() - store.width);
        preds[*it].push_back(cur);
        continue;
      }
      parent.push_back(Parent{cur, sym});
      preds.emplace_back();
      preds[candidate].push_back(cur);
      if (store.size() > max_states) {
        truncated = true;
        break;
      }
    }
    if (truncated) break;
  }

  OracleVerdict out;
  out.states_explored = store.size();

  auto finish = [&](std::uint32_t at, std::vector<NodeId> blocked) {
    out.kind = OracleVerdict::Kind::DeadlockReachable;
    out.blocked = std::move(blocked);
    for (std::uint32_t x = at; x != 0; x = parent[x].from) out.trace.push_back(parent[x].via);
    std::reverse(out.trace.begin(), out.trace.end());
    out.state = sim.describe(load(at));
    return out;
  };

  if (truncated) {
    if (first_stuck) {
      GlobalState s = load(*first_stuck);
      std::vector<NodeId> blocked;
      for (std::size_t k = 0; k < nodes; ++k)
        if (!sim.terminated(s, k)) blocked.push_back(sim.node_id(k));
      return finish(*first_stuck, std::move(blocked));
    }
    out.kind = OracleVerdict::Kind::Inconclusive;
    return out;
  }

  // can_move[k][i]: from state i node k can take another step eventually.
  const std::uint32_t total = store.size();
  std::vector<std::vector<bool>> can_move(nodes, std::vector<bool>(total, false));
  for (std::size_t k = 0; k < nodes; ++k) {
    std::deque<std::uint32_t> work;
    for (std::uint32_t i = 0; i < total; ++i) {
      if (moves_now[k][i]) {
        can_move[k][i] = true;
        work.push_back(i);
      }
    }
    while (!work.empty()) {
      std::uint32_t i = work.front();
      work.pop_front();
      for (std::uint32_t p : preds[i]) {
        if (can_move[k][p]) continue;
        can_move[k][p] = true;
        work.push_back(p);
      }
    }
  }

  for (std::uint32_t i = 0; i < total; ++i) {
    GlobalState s = load(i);
    std::vector<NodeId> blocked;
    for (std::size_t k = 0; k < nodes; ++k)
      if (!sim.terminated(s, k) && !can_move[k][i]) blocked.push_back(sim.node_id(k));
    if (!blocked.empty()) return finish(i, std::move(blocked));
  }
  out.kind = OracleVerdict::Kind::DeadlockFree;
  return out;
}

}  // namespace mpicheck

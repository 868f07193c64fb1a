#pragma once

// Ground truth by exhaustive exploration of the global state space under
// rendezvous semantics. Infinite loops cycle through their body without a
// counter, so every program has a finite state space.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mpicheck/model.hpp"

namespace mpicheck {

// Flattened control state of all nodes: per node a program counter followed
// by one counter per loop of that node (zero while the loop is inactive).
struct GlobalState {
  std::vector<std::uint64_t> words;

  friend bool operator==(const GlobalState&, const GlobalState&) = default;
};

class Simulator {
 public:
  explicit Simulator(const Program& program);

  GlobalState initial() const;
  // Symbols whose sender is at the send and receiver at the receive.
  std::vector<Symbol> enabled(const GlobalState& state) const;
  // Fires the rendezvous of `sym`; throws std::logic_error if not enabled.
  GlobalState fire(const GlobalState& state, const Symbol& sym) const;

  bool terminated(const GlobalState& state, std::size_t node_index) const;
  bool all_terminated(const GlobalState& state) const;
  // True when some node is unterminated and nothing is enabled.
  bool stuck(const GlobalState& state) const;

  std::size_t node_count() const noexcept { return nodes_.size(); }
  NodeId node_id(std::size_t index) const { return nodes_[index].id; }
  // "P0: send a", "P1: done", ... one entry per node.
  std::vector<std::string> describe(const GlobalState& state) const;

 private:
  struct Instr {
    enum class Op { Send, Recv, Head, Tail, End } op = Op::End;
    Symbol sym;
    std::uint64_t count = 0;  // Head/Tail: 0 = infinite
    std::size_t slot = 0;     // Head/Tail: counter word
    std::size_t target = 0;   // Tail: first body instruction
  };
  struct CompiledNode {
    NodeId id;
    std::vector<Instr> code;
    std::size_t offset = 0;  // first word of this node in GlobalState
    std::size_t slots = 0;
  };

  void compile(CompiledNode& node, const Statements& body);
  void settle(const CompiledNode& node, std::uint64_t* words) const;
  const Instr& current(std::size_t node, const GlobalState& s) const;
  std::size_t index_of(NodeId id) const;

  const Program* names_;
  std::vector<CompiledNode> nodes_;
  std::size_t width_ = 0;
};

struct OracleVerdict {
  enum class Kind { DeadlockReachable, DeadlockFree, Inconclusive };

  Kind kind = Kind::DeadlockFree;
  // Rendezvous sequence from the initial state to the deadlocked state.
  std::vector<Symbol> trace;
  // Unterminated nodes that can never move again from the reported state.
  std::vector<NodeId> blocked;
  std::vector<std::string> state;
  std::size_t states_explored = 0;
};

inline constexpr std::size_t kDefaultMaxStates = 1'000'000;

// Breadth-first over all interleavings. Deadlock: a reachable state from
// which some unterminated node can never take another step (a global stuck
// state is the special case where no node can).
OracleVerdict explore(const Program& program, std::size_t max_states = kDefaultMaxStates);

const char* to_string(OracleVerdict::Kind kind);

}  // namespace mpicheck

#pragma once

// Program model for synchronous (rendezvous) message passing: nodes run a
// sequence of sends, receives and counted loops. A message is identified by
// the triple (name, sender, receiver); the k-th send of a symbol pairs with
// its k-th receive.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace mpicheck {

struct NodeId {
  std::uint32_t value = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct Symbol {
  std::string name;
  NodeId src;
  NodeId dst;

  friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

struct SymbolHash {
  std::size_t operator()(const Symbol& s) const noexcept {
    std::size_t h = std::hash<std::string>{}(s.name);
    h ^= (std::size_t{s.src.value} << 1) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= (std::size_t{s.dst.value} << 17) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

// Loop iteration count: a positive integer or infinity.
class LoopCount {
 public:
  static LoopCount finite(std::uint64_t n);
  static LoopCount infinite() { return LoopCount{}; }

  bool is_infinite() const noexcept { return n_ == 0; }
  bool is_finite() const noexcept { return n_ != 0; }
  // Only meaningful for finite counts.
  std::uint64_t value() const noexcept { return n_; }

  friend bool operator==(const LoopCount&, const LoopCount&) = default;

 private:
  LoopCount() = default;
  explicit LoopCount(std::uint64_t n) : n_(n) {}
  std::uint64_t n_ = 0;  // 0 encodes infinity
};

struct Statement;
using Statements = std::vector<Statement>;

struct Statement {
  enum class Kind { Send, Recv, Loop };

  Kind kind = Kind::Send;
  Symbol sym;                                  // Send / Recv
  LoopCount count = LoopCount::finite(1);      // Loop
  Statements body;                             // Loop

  static Statement send(Symbol s) { return Statement{Kind::Send, std::move(s), LoopCount::finite(1), {}}; }
  static Statement recv(Symbol s) { return Statement{Kind::Recv, std::move(s), LoopCount::finite(1), {}}; }
  static Statement loop(LoopCount n, Statements b) { return Statement{Kind::Loop, {}, n, std::move(b)}; }

  bool is_loop() const noexcept { return kind == Kind::Loop; }

  friend bool operator==(const Statement&, const Statement&) = default;
};

struct Node {
  NodeId id;
  Statements body;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Program {
  std::vector<Node> nodes;
  // Display names indexed by NodeId value; ids without an entry print as "P<id>".
  std::vector<std::string> names;

  std::string name_of(NodeId id) const;
  const Node* find(NodeId id) const;

  friend bool operator==(const Program&, const Program&) = default;
};

enum class ModelClass { SModel, L0, L2 };

const char* to_string(ModelClass c);

// Symbol -> number of occurrences, nested finite loops multiplying their bodies.
using OccurrenceCount = std::map<Symbol, std::uint64_t>;

// Per-node communication events in program order (an S-Model).
using EventQueues = std::map<NodeId, std::vector<Symbol>>;

inline constexpr std::uint64_t kDefaultMaxEvents = 1'000'000;

// Checks all well-formedness rules and returns the program unchanged.
// Throws Error with the first violation found.
Program validate(Program program);

ModelClass classify(const Program& program);

OccurrenceCount count_occurrences(const Statements& body);

// Expands every loop. Throws InfiniteLoop on an infinite count and
// SizeExceeded once more than max_events events would be produced.
EventQueues unroll(const Program& program, std::uint64_t max_events = kDefaultMaxEvents);

std::vector<Symbol> unroll(const Statements& body, std::uint64_t max_events = kDefaultMaxEvents);

// Builds an S-Model Program from event queues (the inverse direction of unroll).
Program from_queues(const EventQueues& queues, std::vector<std::string> names = {});

bool has_infinite_loop(const Program& program);

// Reads MPICHECK_MAX_EVENTS, falling back to kDefaultMaxEvents.
std::uint64_t max_events_from_env();

}  // namespace mpicheck

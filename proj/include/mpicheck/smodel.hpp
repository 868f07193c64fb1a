#pragma once

// Deadlock detection for loop-free programs. The queue matcher is the fast
// path; the message dependence graph (MDG) gives cycle witnesses and an
// independent second opinion.

#include <cstdint>
#include <optional>
#include <vector>

#include "mpicheck/model.hpp"
#include "mpicheck/verdict.hpp"

namespace mpicheck {

struct QueueOptions {
  // When set, simultaneously available matches are taken in an order drawn
  // from this seed instead of FIFO worklist order.
  std::optional<std::uint64_t> shuffle_seed;
};

// Repeatedly removes a symbol from the fronts of queues src and dst when
// both fronts carry it. Deadlock when no queue can advance and some are
// non-empty. Linear in the total number of events.
Verdict check_by_queues(const EventQueues& queues, const QueueOptions& options = {});

struct UnpairedEvent {
  NodeId node;
  std::size_t position = 0;
  Symbol sym;
};

// Contracted message dependence graph: one vertex per matched send/recv
// pair, an edge between consecutive pairs in each node's program order.
struct Mdg {
  std::vector<MatchedPair> pairs;
  std::vector<std::vector<std::uint32_t>> successors;
  std::vector<UnpairedEvent> unpaired;

  std::size_t edge_count() const;
};

Mdg build_mdg(const EventQueues& queues);

// A directed cycle over pair indices, if any.
std::optional<std::vector<std::uint32_t>> find_cycle(const Mdg& mdg);

// Cycle as a witness; unpaired events also yield a deadlock witness
// (UnmatchedTotals) when the graph itself is acyclic.
std::optional<DeadlockWitness> find_deadlock_cycle(const Mdg& mdg);

struct SModelOptions {
  // Run the MDG path even when the queue matcher reports no deadlock and
  // throw InternalDisagreement if the two methods differ.
  bool verify = true;
};

Verdict check_smodel(const EventQueues& queues, const SModelOptions& options = {});

}  // namespace mpicheck

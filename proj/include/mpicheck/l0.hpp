#pragma once

// Single-loop programs: ratio equations from per-iteration message counts,
// loop-time consistency, LCM slicing into a finite S-Model.

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "mpicheck/model.hpp"
#include "mpicheck/reg.hpp"
#include "mpicheck/verdict.hpp"

namespace mpicheck {

struct AnalysisOptions {
  std::uint64_t max_events = kDefaultMaxEvents;
  // Cross-check every S-Model verdict against the MDG.
  bool verify = true;
  // Record per-step snapshots for reports.
  bool trace = false;
};

// Occurrences of each symbol in one node for one iteration of its scope,
// plus the symbols in first-appearance order.
struct NodeCounts {
  NodeId node;
  OccurrenceCount counts;
  std::vector<Symbol> order;
};

NodeCounts node_counts(NodeId node, const Statements& body);

// One equation per symbol, lower-ranked node on the left; equations follow
// first appearance (node order, then program order). Every listed node is a
// variable. A symbol present on one side only yields UnmatchedTotals.
std::variant<RatioEquationGroup, UnmatchedTotals> build_reg(const std::vector<NodeCounts>& nodes,
                                                            const Program& names);

struct L0Part {
  Statements preamble;
  LoopCount count = LoopCount::finite(1);
  Statements body;
  Statements postamble;
};

struct L0View {
  std::map<NodeId, L0Part> nodes;

  // One loop and nothing else in every node.
  bool canonical() const;
};

// Splits every node around its single top-level loop. Absent when some
// node has no loop, several loops, or nested loops.
std::optional<L0View> l0_view(const Program& program);

using LoopTimes = std::map<NodeId, LoopCount>;

std::variant<RatioEquationGroup, UnmatchedTotals> build_l0_reg(const L0View& view, const Program& names);

// Within each solution component all products p_i * t_i must agree, where
// an infinite t counts as zero. Returns the violation, if any.
std::optional<RatioInconsistency> ratio_consistent(const RatioSolution& solution, const LoopTimes& times,
                                                   const Program& names);

// Loop count of node i becomes lcm(component) / p_i.
Program slice(const L0View& view, const RatioSolution& solution, const Program& original);

// First symbol whose total sends differ from its total receives.
std::optional<UnmatchedTotals> unbalanced_symbol(const Program& program);

struct L0Trace {
  std::optional<RatioEquationGroup> group;
  std::optional<RatioSolution> solution;
  std::map<NodeId, std::uint64_t> sliced_times;
  std::optional<EventQueues> smodel;
};

struct L0Result {
  Verdict verdict;
  L0Trace trace;
};

// Throws NotApplicable unless the program is a canonical L0.
L0Result check_l0(const Program& program, const AnalysisOptions& options = {});

}  // namespace mpicheck

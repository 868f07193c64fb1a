#pragma once

// Nested-loop programs: power strings driven by the First Power Pool (FPP),
// the leading power of every node. Related sets of FPP entries are aligned
// by their ratio equations and consumed whole rounds at a time.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpicheck/l0.hpp"
#include "mpicheck/power.hpp"
#include "mpicheck/verdict.hpp"

namespace mpicheck {

using PowerStrings = std::map<NodeId, PowerString>;

// Normalized power string of every node.
PowerStrings to_power_strings(const Program& program);

struct RegStage {
  std::string label;
  std::optional<RatioEquationGroup> group;
  std::optional<RatioSolution> solution;
  std::optional<Inconsistent> inconsistent;
};

struct StripOutcome {
  // Finite strings; empty when `deadlock` is set.
  PowerStrings strings;
  RegStage reg;
  // Iterations kept for each node that had an infinite outer loop.
  std::map<NodeId, std::uint64_t> replication;
  std::optional<Verdict> deadlock;
};

// Whole-program ratio equations from per-outer-iteration counts; infinite
// bodies are replicated lcm/p_i times and the infinite wrapper dropped.
// Finite nodes join the consistency check with loop time one.
StripOutcome strip_outer_infinite(const PowerStrings& strings, const Program& names);

using Fpp = std::map<NodeId, Power>;

Fpp fpp(const PowerStrings& strings);

// REG of the whole pool. Symbols whose partner is not in the pool yet are
// left out, so unrelated members end up in separate components.
RegStage pool_reg(const Fpp& pool, const Program& names);

struct RelatedSet {
  std::vector<NodeId> members;
  std::vector<Symbol> symbols;
  bool eligible = false;
};

// Components of the pool under "bodies share a symbol". A set is eligible
// when every symbol it mentions has both endpoints among its members.
std::vector<RelatedSet> related_sets(const Fpp& pool);

struct AlignOutcome {
  enum class Kind { Progress, Deadlock, NoProgress };

  Kind kind = Kind::NoProgress;
  Verdict verdict;
  RegStage reg;
  // Iterations of each member's body in one balanced round.
  std::map<NodeId, std::uint64_t> per_round;
  std::uint64_t rounds = 0;
  std::string note;
};

// Balances the set's leading powers by their ratio equations, checks one
// round as an S-Model and removes as many whole rounds as every member can
// supply. Mutates `strings` only on Progress.
AlignOutcome align_and_reduce(const RelatedSet& set, PowerStrings& strings, const Program& names,
                              const AnalysisOptions& options = {});

struct FppSnapshot {
  std::map<NodeId, std::string> pool;
  std::vector<std::string> actions;
};

struct L2Result {
  Verdict verdict;
  PowerStrings normalized;
  StripOutcome strip;
  std::vector<FppSnapshot> trace;
  std::vector<RegStage> regs;
};

L2Result check_l2(const Program& program, const AnalysisOptions& options = {});

}  // namespace mpicheck

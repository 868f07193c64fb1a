#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mpicheck/model.hpp"
#include "mpicheck/reg.hpp"

namespace mpicheck {

// The k-th (0-based) send of `sym` paired with its k-th receive.
struct MatchedPair {
  Symbol sym;
  std::uint32_t instance = 0;

  friend auto operator<=>(const MatchedPair&, const MatchedPair&) = default;
};

struct StuckQueues {
  EventQueues remaining;
};

struct MdgCycle {
  std::vector<MatchedPair> pairs;
};

struct UnmatchedTotals {
  Symbol sym;
  std::uint64_t sends = 0;
  std::uint64_t recvs = 0;
};

struct RatioInconsistency {
  std::string reason;
  std::vector<RatioEquation> equations;
};

struct FppStuck {
  // node -> rendered remaining power string
  std::vector<std::pair<NodeId, std::string>> snapshot;
};

using DeadlockWitness = std::variant<StuckQueues, MdgCycle, UnmatchedTotals, RatioInconsistency, FppStuck>;

struct Verdict {
  std::optional<DeadlockWitness> deadlock;

  static Verdict free() { return Verdict{}; }
  static Verdict deadlocked(DeadlockWitness w) { return Verdict{std::move(w)}; }

  bool is_deadlock() const noexcept { return deadlock.has_value(); }
};

const char* witness_kind(const DeadlockWitness& w);

std::string describe(const DeadlockWitness& w, const Program& names);

std::string pair_label(const MatchedPair& p, const Program& names);

}  // namespace mpicheck

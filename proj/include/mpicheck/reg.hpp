#pragma once

// Ratio Equation Groups: constraints p_i : p_j = a : b over positive
// unknowns, solved per connected component with exact integer ratios.

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace mpicheck {

using VarId = std::uint32_t;

struct RatioEquation {
  VarId i = 0;
  VarId j = 0;
  std::uint64_t a = 1;
  std::uint64_t b = 1;
  // Free-form origin, e.g. the message the equation was derived from.
  std::string label;

  friend bool operator==(const RatioEquation&, const RatioEquation&) = default;
};

class RatioEquationGroup {
 public:
  void add_var(VarId v);
  // Adds p_i : p_j = a : b. Both endpoints are added as variables.
  void add(VarId i, VarId j, std::uint64_t a, std::uint64_t b, std::string label = {});

  const std::vector<VarId>& vars() const noexcept { return vars_; }
  const std::vector<RatioEquation>& equations() const noexcept { return equations_; }

 private:
  std::vector<VarId> vars_;  // sorted, unique
  std::vector<RatioEquation> equations_;
};

struct RatioSolution {
  // Each component sorted ascending; components ordered by smallest member.
  std::vector<std::vector<VarId>> components;
  std::map<VarId, std::uint64_t> values;

  std::uint64_t value(VarId v) const { return values.at(v); }
  const std::vector<VarId>& component_of(VarId v) const;
  // Least common multiple of the values in v's component.
  std::uint64_t lcm_of_component(VarId v) const;
};

struct Inconsistent {
  // Spanning-tree path from i to j followed by the clashing equation.
  std::vector<RatioEquation> witness;
  std::string explanation;
};

using RegResult = std::variant<RatioSolution, Inconsistent>;

RegResult solve(const RatioEquationGroup& group);

std::vector<std::vector<VarId>> components(const RatioEquationGroup& group);

std::string to_string(const RatioEquation& eq);

}  // namespace mpicheck

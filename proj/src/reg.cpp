#include "mpicheck/reg.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "mpicheck/errors.hpp"

namespace mpicheck {
namespace {

using u128 = unsigned __int128;

std::uint64_t narrow(u128 v) {
  if (v > static_cast<u128>(UINT64_MAX)) throw Error(ErrorKind::Overflow, "ratio arithmetic overflow");
  return static_cast<std::uint64_t>(v);
}

// Positive rational kept in lowest terms.
struct Ratio {
  std::uint64_t num = 1;
  std::uint64_t den = 1;

  static Ratio make(u128 n, u128 d) {
    u128 g = gcd128(n, d);
    return Ratio{narrow(n / g), narrow(d / g)};
  }

  static u128 gcd128(u128 a, u128 b) {
    while (b != 0) {
      u128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  friend Ratio operator*(Ratio x, Ratio y) {
    // cross-reduce first so intermediates stay small
    std::uint64_t g1 = std::gcd(x.num, y.den);
    std::uint64_t g2 = std::gcd(y.num, x.den);
    return make(static_cast<u128>(x.num / g1) * (y.num / g2), static_cast<u128>(x.den / g2) * (y.den / g1));
  }

  Ratio inverse() const { return Ratio{den, num}; }

  friend bool operator==(const Ratio&, const Ratio&) = default;
};

// Union-find where ratio_[x] = p_x / p_parent(x).
class WeightedUnionFind {
 public:
  explicit WeightedUnionFind(std::size_t n) : parent_(n), rank_(n, 0), ratio_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  // Returns root and sets to_root = p_x / p_root.
  std::size_t find(std::size_t x, Ratio& to_root) {
    std::size_t root = x;
    Ratio acc{};
    while (parent_[root] != root) {
      acc = acc * ratio_[root];
      root = parent_[root];
    }
    // second pass: path compression with accumulated ratios
    Ratio remaining = acc;
    std::size_t cur = x;
    while (parent_[cur] != root && parent_[cur] != cur) {
      std::size_t next = parent_[cur];
      Ratio here = remaining;
      remaining = remaining * ratio_[cur].inverse();
      ratio_[cur] = here;
      parent_[cur] = root;
      cur = next;
    }
    to_root = acc;
    return root;
  }

  // Links so that p_x / p_y = r, given x, y in different sets.
  void unite(std::size_t x, std::size_t y, Ratio r) {
    Ratio rx, ry;
    std::size_t a = find(x, rx);
    std::size_t b = find(y, ry);
    // p_a / p_b = (p_x / rx) / (p_y / ry) = r * ry / rx
    Ratio a_over_b = r * ry * rx.inverse();
    if (rank_[a] < rank_[b]) {
      parent_[a] = b;
      ratio_[a] = a_over_b;
    } else {
      parent_[b] = a;
      ratio_[b] = a_over_b.inverse();
      if (rank_[a] == rank_[b]) ++rank_[a];
    }
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned> rank_;
  std::vector<Ratio> ratio_;
};

struct Indexed {
  std::unordered_map<VarId, std::size_t> index;
  const std::vector<VarId>* vars = nullptr;
};

Indexed index_vars(const RatioEquationGroup& g) {
  Indexed ix;
  ix.vars = &g.vars();
  for (std::size_t k = 0; k < g.vars().size(); ++k) ix.index.emplace(g.vars()[k], k);
  return ix;
}

std::vector<std::vector<VarId>> group_components(const std::vector<VarId>& vars,
                                                 const std::vector<std::size_t>& root_of) {
  std::map<std::size_t, std::vector<VarId>> by_root;
  for (std::size_t k = 0; k < vars.size(); ++k) by_root[root_of[k]].push_back(vars[k]);
  std::vector<std::vector<VarId>> out;
  for (auto& [root, members] : by_root) {
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return out;
}

// Equations along the tree path between u and v in the forest of accepted equations.
std::vector<RatioEquation> tree_path(const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& adj,
                                     const std::vector<RatioEquation>& eqs, std::size_t u, std::size_t v) {
  std::vector<std::pair<std::size_t, std::size_t>> prev(adj.size(), {SIZE_MAX, SIZE_MAX});
  std::queue<std::size_t> q;
  q.push(u);
  prev[u] = {u, SIZE_MAX};
  while (!q.empty()) {
    std::size_t x = q.front();
    q.pop();
    if (x == v) break;
    for (auto [y, e] : adj[x]) {
      if (prev[y].first != SIZE_MAX) continue;
      prev[y] = {x, e};
      q.push(y);
    }
  }
  std::vector<RatioEquation> path;
  for (std::size_t x = v; x != u; x = prev[x].first) path.push_back(eqs[prev[x].second]);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

void RatioEquationGroup::add_var(VarId v) {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), v);
  if (it == vars_.end() || *it != v) vars_.insert(it, v);
}

void RatioEquationGroup::add(VarId i, VarId j, std::uint64_t a, std::uint64_t b, std::string label) {
  if (a == 0 || b == 0) throw std::invalid_argument("ratio terms must be positive");
  add_var(i);
  add_var(j);
  equations_.push_back(RatioEquation{i, j, a, b, std::move(label)});
}

const std::vector<VarId>& RatioSolution::component_of(VarId v) const {
  for (const auto& c : components)
    if (std::binary_search(c.begin(), c.end(), v)) return c;
  throw std::out_of_range("variable not in solution");
}

std::uint64_t RatioSolution::lcm_of_component(VarId v) const {
  std::uint64_t l = 1;
  for (VarId m : component_of(v)) {
    std::uint64_t x = value(m);
    l = narrow(static_cast<u128>(l / std::gcd(l, x)) * x);
  }
  return l;
}

std::string to_string(const RatioEquation& eq) {
  std::ostringstream out;
  out << "p" << eq.i << " : p" << eq.j << " = " << eq.a << " : " << eq.b;
  return out.str();
}

RegResult solve(const RatioEquationGroup& group) {
  const auto& vars = group.vars();
  Indexed ix = index_vars(group);
  WeightedUnionFind uf(vars.size());
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> tree(vars.size());

  const auto& eqs = group.equations();
  for (std::size_t e = 0; e < eqs.size(); ++e) {
    const RatioEquation& eq = eqs[e];
    std::size_t x = ix.index.at(eq.i);
    std::size_t y = ix.index.at(eq.j);
    Ratio want = Ratio::make(eq.a, eq.b);  // p_i / p_j
    Ratio rx, ry;
    std::size_t a = uf.find(x, rx);
    std::size_t b = uf.find(y, ry);
    if (a != b) {
      uf.unite(x, y, want);
      tree[x].push_back({y, e});
      tree[y].push_back({x, e});
      continue;
    }
    Ratio have = rx * ry.inverse();
    if (have == want) continue;

    Inconsistent bad;
    bad.witness = x == y ? std::vector<RatioEquation>{} : tree_path(tree, eqs, x, y);
    bad.witness.push_back(eq);
    std::ostringstream why;
    why << "equations imply p" << eq.i << " : p" << eq.j << " = " << have.num << " : " << have.den
        << " but " << to_string(eq) << (eq.label.empty() ? "" : " (" + eq.label + ")") << " requires "
        << want.num << " : " << want.den;
    bad.explanation = why.str();
    return bad;
  }

  std::vector<std::size_t> root_of(vars.size());
  std::vector<Ratio> rel(vars.size());
  for (std::size_t k = 0; k < vars.size(); ++k) root_of[k] = uf.find(k, rel[k]);

  RatioSolution sol;
  sol.components = group_components(vars, root_of);
  // Scale each component by the lcm of its denominators, then divide out the gcd.
  std::unordered_map<std::size_t, std::uint64_t> den_lcm;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    auto [it, fresh] = den_lcm.emplace(root_of[k], 1);
    std::uint64_t l = it->second;
    it->second = narrow(static_cast<u128>(l / std::gcd(l, rel[k].den)) * rel[k].den);
  }
  std::vector<std::uint64_t> scaled(vars.size());
  std::unordered_map<std::size_t, std::uint64_t> num_gcd;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    std::uint64_t l = den_lcm.at(root_of[k]);
    scaled[k] = narrow(static_cast<u128>(rel[k].num) * (l / rel[k].den));
    auto [it, fresh] = num_gcd.emplace(root_of[k], scaled[k]);
    if (!fresh) it->second = std::gcd(it->second, scaled[k]);
  }
  for (std::size_t k = 0; k < vars.size(); ++k) sol.values[vars[k]] = scaled[k] / num_gcd.at(root_of[k]);
  return sol;
}

std::vector<std::vector<VarId>> components(const RatioEquationGroup& group) {
  const auto& vars = group.vars();
  Indexed ix = index_vars(group);
  std::vector<std::size_t> parent(vars.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const RatioEquation& eq : group.equations()) {
    std::size_t a = find(ix.index.at(eq.i));
    std::size_t b = find(ix.index.at(eq.j));
    if (a != b) parent[a] = b;
  }
  std::vector<std::size_t> root_of(vars.size());
  for (std::size_t k = 0; k < vars.size(); ++k) root_of[k] = find(k);
  return group_components(vars, root_of);
}

}  // namespace mpicheck

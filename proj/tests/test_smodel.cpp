#include <doctest.h>

#include <random>

#include "corpus.hpp"
#include "fixtures.hpp"
#include "mpicheck/smodel.hpp"

using namespace mpicheck;
using fixtures::sym;

namespace {

EventQueues crossed() {
  return {{NodeId{0}, {sym("a", 0, 1), sym("b", 1, 0)}}, {NodeId{1}, {sym("b", 1, 0), sym("a", 0, 1)}}};
}

}  // namespace

TEST_SUITE("smodel") {
  TEST_CASE("queue matcher verdicts") {
    CHECK(check_by_queues(unroll(fixtures::load("prog2.mdl"))).is_deadlock());
    CHECK_FALSE(check_by_queues(unroll(fixtures::load("prog9.mdl"))).is_deadlock());
    CHECK(check_by_queues(crossed()).is_deadlock());
    CHECK_FALSE(check_by_queues({}).is_deadlock());
    CHECK_FALSE(check_by_queues({{NodeId{0}, {}}, {NodeId{1}, {}}}).is_deadlock());
  }

  TEST_CASE("stuck snapshot keeps the blocked fronts") {
    Verdict v = check_by_queues(crossed());
    const auto& stuck = std::get<StuckQueues>(*v.deadlock);
    CHECK(stuck.remaining == crossed());
  }

  TEST_CASE("MDG of program (2)") {
    Mdg g = build_mdg(unroll(fixtures::load("prog2.mdl")));
    REQUIRE(g.pairs.size() == 3);
    CHECK(g.edge_count() == 3);
    CHECK(g.unpaired.empty());
    auto cycle = find_deadlock_cycle(g);
    REQUIRE(cycle.has_value());
    const auto& c = std::get<MdgCycle>(*cycle);
    REQUIRE(c.pairs.size() == 3);
    // The pairs of a, b and c, in the order they appear on the cycle.
    std::vector<std::string> names;
    for (const MatchedPair& p : c.pairs) names.push_back(p.sym.name);
    const std::vector<std::vector<std::string>> rotations{{"a", "b", "c"}, {"b", "c", "a"}, {"c", "a", "b"}};
    CHECK(std::find(rotations.begin(), rotations.end(), names) != rotations.end());
    Program p2 = fixtures::load("prog2.mdl");
    CHECK(pair_label(c.pairs[0], p2).find("#0") != std::string::npos);
  }

  TEST_CASE("MDG small cases") {
    Mdg one = build_mdg({{NodeId{0}, {sym("a", 0, 1)}}, {NodeId{1}, {sym("a", 0, 1)}}});
    CHECK(one.pairs.size() == 1);
    CHECK(one.edge_count() == 0);
    CHECK_FALSE(find_deadlock_cycle(build_mdg({})).has_value());
    Mdg nine = build_mdg(unroll(fixtures::load("prog9.mdl")));
    CHECK(nine.pairs.size() == 8);
    CHECK_FALSE(find_cycle(nine).has_value());
    CHECK_FALSE(find_deadlock_cycle(nine).has_value());
  }

  TEST_CASE("unpaired events are a deadlock") {
    EventQueues q{{NodeId{0}, {sym("a", 0, 1), sym("a", 0, 1)}}, {NodeId{1}, {sym("a", 0, 1)}}};
    Mdg g = build_mdg(q);
    CHECK(g.unpaired.size() == 1);
    auto w = find_deadlock_cycle(g);
    REQUIRE(w.has_value());
    const auto& u = std::get<UnmatchedTotals>(*w);
    CHECK(u.sends == 2);
    CHECK(u.recvs == 1);
    CHECK(check_smodel(q).is_deadlock());
  }

  TEST_CASE("check_smodel prefers the cycle witness") {
    Verdict v = check_smodel(unroll(fixtures::load("prog2.mdl")));
    REQUIRE(v.is_deadlock());
    CHECK(std::holds_alternative<MdgCycle>(*v.deadlock));
    CHECK_FALSE(check_smodel(unroll(fixtures::load("prog9.mdl"))).is_deadlock());
  }

  TEST_CASE("methods agree and matching order does not matter") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 500; ++k) {
      EventQueues q = corpus::random_queues(rng, 2 + static_cast<std::uint32_t>(rng() % 3), rng() % 10);
      if (k % 4 == 0 && !q.begin()->second.empty()) q.begin()->second.pop_back();
      const bool by_queue = check_by_queues(q).is_deadlock();
      CHECK(by_queue == find_deadlock_cycle(build_mdg(q)).has_value());
      for (std::uint64_t seed = 0; seed < 10; ++seed)
        CHECK(check_by_queues(q, QueueOptions{seed}).is_deadlock() == by_queue);
    }
  }
}

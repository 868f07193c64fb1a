#include <doctest.h>

#include "fixtures.hpp"
#include "mpicheck/l0.hpp"
#include "mpicheck/l2.hpp"
#include "mpicheck/oracle.hpp"
#include "mpicheck/smodel.hpp"

using namespace mpicheck;
using fixtures::sym;

namespace {

std::map<std::string, std::string> pool_text(const Fpp& pool, const Program& names) {
  std::map<std::string, std::string> out;
  for (const auto& [id, p] : pool) out[names.name_of(id)] = to_string(p);
  return out;
}

std::map<std::string, std::string> snapshot_text(const FppSnapshot& s, const Program& names) {
  std::map<std::string, std::string> out;
  for (const auto& [id, text] : s.pool) out[names.name_of(id)] = text;
  return out;
}

PowerStrings strings_after_strip(const Program& p) {
  StripOutcome strip = strip_outer_infinite(to_power_strings(p), p);
  REQUIRE_FALSE(strip.deadlock.has_value());
  return strip.strings;
}

using Text = std::map<std::string, std::string>;

}  // namespace

TEST_SUITE("l2") {
  TEST_CASE("stripping prog10 strings removes the outer loops") {
    Program p = fixtures::load("prog10.mdl");
    StripOutcome strip = strip_outer_infinite(to_power_strings(p), p);
    REQUIRE_FALSE(strip.deadlock.has_value());
    REQUIRE(strip.reg.solution.has_value());
    CHECK(strip.reg.solution->values == std::map<VarId, std::uint64_t>{{0, 1}, {1, 1}, {2, 1}});
    CHECK(strip.replication == std::map<NodeId, std::uint64_t>{{NodeId{0}, 1}, {NodeId{1}, 1}, {NodeId{2}, 1}});
    CHECK(to_string(strip.strings.at(NodeId{0})) == "(ac)^2 b^4 (ac)^1");
    CHECK(to_string(strip.strings.at(NodeId{1})) == "(ac)^3 d^1");
    CHECK(to_string(strip.strings.at(NodeId{2})) == "b^4 d^1");
  }

  TEST_CASE("mixed infinite and finite nodes deadlock") {
    Program p = validate(parse("node P0 { for inf { send a to P1 } }\nnode P1 { recv a from P0 }"));
    StripOutcome strip = strip_outer_infinite(to_power_strings(p), p);
    REQUIRE(strip.deadlock.has_value());
    CHECK(std::holds_alternative<RatioInconsistency>(*strip.deadlock->deadlock));
  }

  TEST_CASE("replication follows the solution") {
    Program p = validate(parse("node P0 { for inf { send a to P1, send a to P1 } }\n"
                               "node P1 { for inf { recv a from P0 } }"));
    StripOutcome strip = strip_outer_infinite(to_power_strings(p), p);
    REQUIRE_FALSE(strip.deadlock.has_value());
    CHECK(strip.reg.solution->values == std::map<VarId, std::uint64_t>{{0, 2}, {1, 1}});
    CHECK(strip.replication == std::map<NodeId, std::uint64_t>{{NodeId{0}, 1}, {NodeId{1}, 2}});
    CHECK(flatten(strip.strings.at(NodeId{0})).size() == flatten(strip.strings.at(NodeId{1})).size());
  }

  TEST_CASE("first power pool and related sets of prog10") {
    Program p = fixtures::load("prog10.mdl");
    PowerStrings s = strings_after_strip(p);
    Fpp pool = fpp(s);
    CHECK(pool_text(pool, p) == Text{{"P0", "(ac)^2"}, {"P1", "(ac)^3"}, {"P2", "b^4"}});

    RegStage reg = pool_reg(pool, p);
    REQUIRE(reg.solution.has_value());
    CHECK(reg.solution->components == std::vector<std::vector<VarId>>{{0, 1}, {2}});
    CHECK(reg.solution->values == std::map<VarId, std::uint64_t>{{0, 1}, {1, 1}, {2, 1}});

    auto sets = related_sets(pool);
    REQUIRE(sets.size() == 2);
    CHECK(sets[0].members == std::vector<NodeId>{NodeId{0}, NodeId{1}});
    CHECK(sets[0].eligible);
    CHECK(sets[1].members == std::vector<NodeId>{NodeId{2}});
    CHECK_FALSE(sets[1].eligible);
  }

  TEST_CASE("reducing the first prog10 pool yields the second") {
    Program p = fixtures::load("prog10.mdl");
    PowerStrings s = strings_after_strip(p);
    auto sets = related_sets(fpp(s));
    AlignOutcome r = align_and_reduce(sets[0], s, p);
    CHECK(r.kind == AlignOutcome::Kind::Progress);
    CHECK(r.rounds == 2);
    CHECK(r.per_round == std::map<NodeId, std::uint64_t>{{NodeId{0}, 1}, {NodeId{1}, 1}});
    Fpp next = fpp(s);
    CHECK(pool_text(next, p) == Text{{"P0", "b^4"}, {"P1", "(ac)^1"}, {"P2", "b^4"}});

    auto again = related_sets(next);
    REQUIRE(again.size() == 2);
    CHECK(again[0].members == std::vector<NodeId>{NodeId{0}, NodeId{2}});
    CHECK(again[0].eligible);
    CHECK(again[1].members == std::vector<NodeId>{NodeId{1}});
    CHECK_FALSE(again[1].eligible);
  }

  TEST_CASE("the (18) variant reduces the same way") {
    Program p = fixtures::load("prog18.mdl");
    PowerStrings s = strings_after_strip(p);
    CHECK(pool_text(fpp(s), p) == Text{{"P0", "(a^1 c^5)^2"}, {"P1", "(a^1 c^5)^3"}, {"P2", "b^4"}});
    AlignOutcome r = align_and_reduce(related_sets(fpp(s))[0], s, p);
    CHECK(r.kind == AlignOutcome::Kind::Progress);
    CHECK(r.rounds == 2);
    CHECK(to_string(s.at(NodeId{1})) == "a^1 c^5 d^1");
  }

  TEST_CASE("crossed set deadlocks in one round") {
    Program names = validate(parse("node P0 { send a to P1, recv b from P1 }\nnode P1 { send b to P0, recv a from P0 }"));
    PowerStrings s = to_power_strings(names);
    auto sets = related_sets(fpp(s));
    REQUIRE(sets.size() == 1);
    AlignOutcome r = align_and_reduce(sets[0], s, names);
    CHECK(r.kind == AlignOutcome::Kind::Deadlock);
    CHECK(r.verdict.is_deadlock());
  }

  TEST_CASE("empty pool") {
    CHECK(fpp({}).empty());
    CHECK(related_sets({}).empty());
  }

  TEST_CASE("check_l2 on the golden programs") {
    AnalysisOptions traced;
    traced.trace = true;
    Program p10 = fixtures::load("prog10.mdl");
    L2Result r = check_l2(p10, traced);
    CHECK_FALSE(r.verdict.is_deadlock());
    REQUIRE(r.trace.size() >= 3);
    CHECK(snapshot_text(r.trace[1], p10) == Text{{"P0", "(ac)^2"}, {"P1", "(ac)^3"}, {"P2", "b^4"}});
    CHECK(snapshot_text(r.trace[2], p10) == Text{{"P0", "b^4"}, {"P1", "(ac)^1"}, {"P2", "b^4"}});

    CHECK_FALSE(check_l2(fixtures::load("prog18.mdl")).verdict.is_deadlock());
    CHECK(check_l2(fixtures::load("prog2.mdl")).verdict.is_deadlock());
    CHECK(check_l2(fixtures::load("prog3.mdl")).verdict.is_deadlock() ==
          check_l0(fixtures::load("prog3.mdl")).verdict.is_deadlock());
  }

  TEST_CASE("misaligned but matching powers are not a deadlock") {
    Program p = validate(parse("node P0 { for 2 { send a to P1, send b to P1 } }\n"
                               "node P1 { recv a from P0, for 1 { recv b from P0, recv a from P0 }, recv b from P0 }"));
    CHECK_FALSE(check_l2(p).verdict.is_deadlock());
    CHECK(explore(p).kind == OracleVerdict::Kind::DeadlockFree);
  }

  TEST_CASE("finite programs agree with the unrolled S-Model") {
    for (const char* name : {"prog2.mdl", "prog8.mdl", "prog9.mdl"}) {
      CAPTURE(name);
      Program p = fixtures::load(name);
      CHECK(check_l2(p).verdict.is_deadlock() == check_smodel(unroll(p)).is_deadlock());
    }
  }
}

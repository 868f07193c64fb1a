#include <doctest.h>

#include <random>

#include "corpus.hpp"
#include "fixtures.hpp"
#include "mpicheck/errors.hpp"
#include "mpicheck/model.hpp"
#include "mpicheck/parser.hpp"

using namespace mpicheck;
using fixtures::sym;

namespace {

ErrorKind validation_error(const Program& p) {
  try {
    validate(p);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("program was accepted");
  return ErrorKind::EmptyProgram;
}

Program two_nodes(Statements a, Statements b) {
  return Program{{Node{NodeId{0}, std::move(a)}, Node{NodeId{1}, std::move(b)}}, {"P0", "P1"}};
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("golden programs validate and classify") {
    CHECK(classify(fixtures::load("prog2.mdl")) == ModelClass::SModel);
    CHECK(classify(fixtures::load("prog3.mdl")) == ModelClass::L0);
    CHECK(classify(fixtures::load("prog8.mdl")) == ModelClass::L0);
    CHECK(classify(fixtures::load("prog9.mdl")) == ModelClass::SModel);
    CHECK(classify(fixtures::load("prog10.mdl")) == ModelClass::L2);
    CHECK(classify(fixtures::load("prog18.mdl")) == ModelClass::L2);
  }

  TEST_CASE("placement rules") {
    Program misplaced = two_nodes({Statement::recv(sym("a", 0, 1))}, {Statement::recv(sym("a", 0, 1))});
    CHECK(validation_error(misplaced) == ErrorKind::MisplacedOperation);

    Program self = two_nodes({Statement::send(sym("a", 0, 0))}, {});
    CHECK(validation_error(self) == ErrorKind::SelfMessage);

    Program dangling = two_nodes({Statement::send(sym("a", 0, 7))}, {});
    CHECK(validation_error(dangling) == ErrorKind::DanglingEndpoint);

    Program dup{{Node{NodeId{0}, {}}, Node{NodeId{0}, {}}}, {}};
    CHECK(validation_error(dup) == ErrorKind::DuplicateNode);

    CHECK(validation_error(Program{}) == ErrorKind::EmptyProgram);
  }

  TEST_CASE("infinite loops only at the top, alone") {
    auto inf = [](Statements b) { return Statement::loop(LoopCount::infinite(), std::move(b)); };
    auto fin = [](std::uint64_t n, Statements b) { return Statement::loop(LoopCount::finite(n), std::move(b)); };
    Statements ok{inf({Statement::send(sym("a", 0, 1))})};
    Statements peer{inf({Statement::recv(sym("a", 0, 1))})};
    CHECK_NOTHROW(validate(two_nodes(ok, peer)));

    Statements nested{fin(2, {inf({Statement::send(sym("a", 0, 1))})})};
    CHECK(validation_error(two_nodes(nested, peer)) == ErrorKind::NestedInfinite);

    Statements trailing{inf({Statement::send(sym("a", 0, 1))}), Statement::send(sym("a", 0, 1))};
    CHECK(validation_error(two_nodes(trailing, peer)) == ErrorKind::InfiniteNotSole);

    Statements empty{fin(2, {})};
    CHECK(validation_error(two_nodes(empty, {})) == ErrorKind::EmptyLoop);
  }

  TEST_CASE("empty nodes are allowed") {
    Program p{{Node{NodeId{0}, {}}}, {"P0"}};
    CHECK_NOTHROW(validate(p));
    CHECK(classify(p) == ModelClass::SModel);
  }

  TEST_CASE("occurrence counts") {
    Program p3 = fixtures::load("prog3.mdl");
    const Statements& p1_body = p3.nodes[1].body.front().body;
    OccurrenceCount c = count_occurrences(p1_body);
    CHECK(c.size() == 3);
    CHECK(c.at(sym("a", 0, 1)) == 2);
    CHECK(c.at(sym("b", 1, 0)) == 2);
    CHECK(c.at(sym("d", 2, 1)) == 2);

    CHECK(count_occurrences({}).empty());

    Program p10 = fixtures::load("prog10.mdl");
    OccurrenceCount c0 = count_occurrences(p10.nodes[0].body.front().body);
    CHECK(c0.size() == 3);
    CHECK(c0.at(sym("a", 0, 1)) == 3);
    CHECK(c0.at(sym("c", 0, 1)) == 3);
    CHECK(c0.at(sym("b", 0, 2)) == 4);

    try {
      count_occurrences(p10.nodes[0].body);
      FAIL("expected InfiniteInside");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InfiniteInside);
    }
  }

  TEST_CASE("unrolling prog8 gives the prog9 queues") {
    EventQueues sliced = unroll(fixtures::load("prog8.mdl"));
    EventQueues flat = unroll(fixtures::load("prog9.mdl"));
    CHECK(sliced == flat);
    CHECK(sliced.at(NodeId{0}) == std::vector<Symbol>{sym("a", 0, 1), sym("c", 0, 2), sym("b", 1, 0),
                                                      sym("a", 0, 1), sym("c", 0, 2), sym("b", 1, 0)});
    CHECK(sliced.at(NodeId{1}) == std::vector<Symbol>{sym("a", 0, 1), sym("b", 1, 0), sym("a", 0, 1),
                                                      sym("d", 2, 1), sym("b", 1, 0), sym("d", 2, 1)});
    CHECK(sliced.at(NodeId{2}) ==
          std::vector<Symbol>{sym("c", 0, 2), sym("d", 2, 1), sym("c", 0, 2), sym("d", 2, 1)});
  }

  TEST_CASE("unrolling small cases and limits") {
    Program twice = two_nodes({Statement::loop(LoopCount::finite(2), {Statement::send(sym("a", 0, 1))})},
                              {Statement::recv(sym("a", 0, 1)), Statement::recv(sym("a", 0, 1))});
    CHECK(unroll(twice).at(NodeId{0}) == std::vector<Symbol>{sym("a", 0, 1), sym("a", 0, 1)});

    Program flat = fixtures::load("prog2.mdl");
    CHECK(from_queues(unroll(flat), flat.names) == flat);

    Program big = two_nodes({Statement::loop(LoopCount::finite(1000), {Statement::send(sym("a", 0, 1))})},
                            {Statement::loop(LoopCount::finite(1000), {Statement::recv(sym("a", 0, 1))})});
    try {
      unroll(big, 1500);
      FAIL("expected SizeExceeded");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SizeExceeded);
    }
    try {
      unroll(fixtures::load("prog3.mdl"));
      FAIL("expected InfiniteLoop");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InfiniteLoop);
    }
  }

  TEST_CASE("loop counts must be positive") { CHECK_THROWS_AS(LoopCount::finite(0), std::invalid_argument); }

  TEST_CASE("unroll totals equal weighted counts") {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 300; ++k) {
      Program p = corpus::random_program(rng, corpus::Flavor::Unstructured, false);
      EventQueues q = unroll(p);
      CHECK(classify(from_queues(q, p.names)) == ModelClass::SModel);
      for (const Node& n : p.nodes) {
        OccurrenceCount from_queue;
        for (const Symbol& s : q.at(n.id)) ++from_queue[s];
        CHECK(from_queue == count_occurrences(n.body));
      }
    }
  }

  TEST_CASE("MPICHECK_MAX_EVENTS") {
    setenv("MPICHECK_MAX_EVENTS", "1234", 1);
    CHECK(max_events_from_env() == 1234);
    unsetenv("MPICHECK_MAX_EVENTS");
    CHECK(max_events_from_env() == kDefaultMaxEvents);
  }
}

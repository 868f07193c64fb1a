#include "mpicheck/model.hpp"

#include <cstdlib>
#include <set>
#include <sstream>

#include "mpicheck/errors.hpp"

namespace mpicheck {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyProgram: return "EmptyProgram";
    case ErrorKind::DuplicateNode: return "DuplicateNode";
    case ErrorKind::SelfMessage: return "SelfMessage";
    case ErrorKind::MisplacedOperation: return "MisplacedOperation";
    case ErrorKind::DanglingEndpoint: return "DanglingEndpoint";
    case ErrorKind::NestedInfinite: return "NestedInfinite";
    case ErrorKind::InfiniteNotSole: return "InfiniteNotSole";
    case ErrorKind::EmptyLoop: return "EmptyLoop";
    case ErrorKind::InfiniteInside: return "InfiniteInside";
    case ErrorKind::InfiniteLoop: return "InfiniteLoop";
    case ErrorKind::SizeExceeded: return "SizeExceeded";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::InternalDisagreement: return "InternalDisagreement";
  }
  return "Unknown";
}

namespace {

std::string position_message(std::size_t line, std::size_t column, const std::string& message) {
  std::ostringstream out;
  out << line << ":" << column << ": " << message;
  return out.str();
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw Error(ErrorKind::Overflow, "occurrence count overflow");
  return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw Error(ErrorKind::Overflow, "occurrence count overflow");
  return r;
}

class Validator {
 public:
  explicit Validator(const Program& p) : program_(p) {
    for (const Node& n : p.nodes) declared_.insert(n.id);
  }

  void run() {
    if (program_.nodes.empty()) throw Error(ErrorKind::EmptyProgram, "program has no nodes");
    std::set<NodeId> seen;
    for (const Node& n : program_.nodes) {
      if (!seen.insert(n.id).second)
        throw Error(ErrorKind::DuplicateNode, "node " + program_.name_of(n.id) + " declared twice");
    }
    for (const Node& n : program_.nodes) {
      for (std::size_t i = 0; i < n.body.size(); ++i) {
        const Statement& st = n.body[i];
        if (st.is_loop() && st.count.is_infinite() && n.body.size() != 1)
          throw Error(ErrorKind::InfiniteNotSole,
                      "node " + program_.name_of(n.id) + ": an infinite loop must be the only top-level statement");
        check(n, st, 0);
      }
    }
  }

 private:
  void check(const Node& n, const Statement& st, int depth) {
    if (st.is_loop()) {
      if (st.count.is_infinite() && depth > 0)
        throw Error(ErrorKind::NestedInfinite,
                    "node " + program_.name_of(n.id) + ": infinite loop below top level");
      if (st.body.empty())
        throw Error(ErrorKind::EmptyLoop, "node " + program_.name_of(n.id) + ": loop with empty body");
      for (const Statement& inner : st.body) check(n, inner, depth + 1);
      return;
    }
    const Symbol& s = st.sym;
    const std::string what = (st.kind == Statement::Kind::Send ? "send " : "recv ") + s.name;
    if (s.src == s.dst)
      throw Error(ErrorKind::SelfMessage, "node " + program_.name_of(n.id) + ": " + what +
                                              " has identical endpoints " + program_.name_of(s.src));
    if (!declared_.count(s.src) || !declared_.count(s.dst)) {
      NodeId missing = declared_.count(s.src) ? s.dst : s.src;
      throw Error(ErrorKind::DanglingEndpoint,
                  "node " + program_.name_of(n.id) + ": " + what + " refers to undeclared node " +
                      program_.name_of(missing));
    }
    NodeId home = st.kind == Statement::Kind::Send ? s.src : s.dst;
    if (home != n.id)
      throw Error(ErrorKind::MisplacedOperation,
                  "node " + program_.name_of(n.id) + ": " + what + " (" + program_.name_of(s.src) + "->" +
                      program_.name_of(s.dst) + ") must live in node " + program_.name_of(home));
  }

  const Program& program_;
  std::set<NodeId> declared_;
};

bool has_loop(const Statements& body) {
  for (const Statement& s : body)
    if (s.is_loop()) return true;
  return false;
}

bool has_nested_loop(const Statements& body) {
  for (const Statement& s : body)
    if (s.is_loop() && has_loop(s.body)) return true;
  return false;
}

bool has_infinite(const Statements& body) {
  for (const Statement& s : body)
    if (s.is_loop() && (s.count.is_infinite() || has_infinite(s.body))) return true;
  return false;
}

void count_into(const Statements& body, std::uint64_t weight, OccurrenceCount& out) {
  for (const Statement& s : body) {
    if (s.is_loop()) {
      if (s.count.is_infinite()) throw Error(ErrorKind::InfiniteInside, "infinite loop inside counted body");
      count_into(s.body, checked_mul(weight, s.count.value()), out);
    } else {
      out[s.sym] = checked_add(out[s.sym], weight);
    }
  }
}

void unroll_into(const Statements& body, std::vector<Symbol>& out, std::uint64_t& budget) {
  for (const Statement& s : body) {
    if (!s.is_loop()) {
      if (budget == 0) throw Error(ErrorKind::SizeExceeded, "unrolled model exceeds the event cap");
      --budget;
      out.push_back(s.sym);
      continue;
    }
    if (s.count.is_infinite()) throw Error(ErrorKind::InfiniteLoop, "cannot unroll an infinite loop");
    for (std::uint64_t k = 0; k < s.count.value(); ++k) unroll_into(s.body, out, budget);
  }
}

}  // namespace

ParseError::ParseError(Kind kind, std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(position_message(line, column, message)),
      kind_(kind),
      line_(line),
      column_(column),
      detail_(message) {}

LoopCount LoopCount::finite(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("finite loop count must be positive");
  return LoopCount{n};
}

std::string Program::name_of(NodeId id) const {
  if (id.value < names.size() && !names[id.value].empty()) return names[id.value];
  return "P" + std::to_string(id.value);
}

const Node* Program::find(NodeId id) const {
  for (const Node& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const char* to_string(ModelClass c) {
  switch (c) {
    case ModelClass::SModel: return "smodel";
    case ModelClass::L0: return "l0";
    case ModelClass::L2: return "l2";
  }
  return "?";
}

Program validate(Program program) {
  Validator(program).run();
  return program;
}

ModelClass classify(const Program& program) {
  bool loops = false;
  for (const Node& n : program.nodes) {
    if (has_nested_loop(n.body)) return ModelClass::L2;
    loops = loops || has_loop(n.body);
  }
  return loops ? ModelClass::L0 : ModelClass::SModel;
}

OccurrenceCount count_occurrences(const Statements& body) {
  OccurrenceCount out;
  count_into(body, 1, out);
  return out;
}

std::vector<Symbol> unroll(const Statements& body, std::uint64_t max_events) {
  std::vector<Symbol> out;
  std::uint64_t budget = max_events;
  unroll_into(body, out, budget);
  return out;
}

EventQueues unroll(const Program& program, std::uint64_t max_events) {
  EventQueues queues;
  std::uint64_t budget = max_events;
  for (const Node& n : program.nodes) {
    auto& q = queues[n.id];
    unroll_into(n.body, q, budget);
  }
  return queues;
}

Program from_queues(const EventQueues& queues, std::vector<std::string> names) {
  Program p;
  p.names = std::move(names);
  for (const auto& [id, events] : queues) {
    Node n{id, {}};
    for (const Symbol& s : events)
      n.body.push_back(s.src == id ? Statement::send(s) : Statement::recv(s));
    p.nodes.push_back(std::move(n));
  }
  return p;
}

bool has_infinite_loop(const Program& program) {
  for (const Node& n : program.nodes)
    if (has_infinite(n.body)) return true;
  return false;
}

std::uint64_t max_events_from_env() {
  const char* raw = std::getenv("MPICHECK_MAX_EVENTS");
  if (raw == nullptr || *raw == '\0') return kDefaultMaxEvents;
  char* end = nullptr;
  unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0' || v == 0) return kDefaultMaxEvents;
  return v;
}

}  // namespace mpicheck

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mpicheck/check.hpp"
#include "mpicheck/errors.hpp"
#include "mpicheck/oracle.hpp"
#include "mpicheck/parser.hpp"

namespace {

using namespace mpicheck;

constexpr int kFree = 0;
constexpr int kDeadlock = 1;
constexpr int kUsage = 2;
constexpr int kInconclusive = 3;

Program load(const std::string& path) { return validate(parse_file(path)); }

void print_ranks(std::ostream& out, const Program& p) {
  out << "nodes:";
  for (const Node& n : p.nodes) out << " " << p.name_of(n.id) << "=p" << n.id.value;
  out << "\n";
}

std::string solution_line(const RatioSolution& sol) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [v, x] : sol.values) {
    out << (first ? "" : ", ") << "p" << v << " = " << x;
    first = false;
  }
  return out.str();
}

void print_reg(std::ostream& out, const RegStage& reg, const std::string& indent = "  ") {
  if (!reg.group) return;
  for (const RatioEquation& eq : reg.group->equations()) out << indent << to_string(eq) << "   " << eq.label << "\n";
  if (reg.solution) {
    out << indent << "solution: " << solution_line(*reg.solution) << "\n";
    for (const auto& comp : reg.solution->components)
      if (comp.size() > 1) {
        out << indent << "component {";
        for (std::size_t k = 0; k < comp.size(); ++k) out << (k ? "," : "") << "p" << comp[k];
        out << "} lcm " << reg.solution->lcm_of_component(comp.front()) << "\n";
      }
  }
  if (reg.inconsistent) out << indent << "inconsistent: " << reg.inconsistent->explanation << "\n";
}

std::string event_text(const Symbol& s, NodeId at, const Program& p) {
  return s.src == at ? "send " + s.name + " to " + p.name_of(s.dst) : "recv " + s.name + " from " + p.name_of(s.src);
}

void print_queues(std::ostream& out, const EventQueues& queues, const Program& p) {
  for (const auto& [id, events] : queues) {
    out << "  " << p.name_of(id) << ":";
    for (const Symbol& e : events) out << " " << (e.src == id ? "!" : "?") << e.name;
    out << "\n";
  }
}

int run_check(const std::string& path, bool trace, bool json, const std::string& via_text) {
  Program program = load(path);
  AnalysisOptions options;
  options.max_events = max_events_from_env();
  options.trace = trace;
  CheckResult result = check(program, parse_via(via_text), options);

  if (json) {
    std::cout << to_json(result, program).dump(2) << "\n";
  } else {
    print_ranks(std::cout, program);
    std::cout << "class: " << to_string(result.model_class) << ", engine: " << result.phase << "\n";
    if (trace) {
      // Per-pass solutions appear in the FPP narration below.
      std::size_t shown = result.fpp_trace.empty() ? result.regs.size() : std::min<std::size_t>(1, result.regs.size());
      for (std::size_t k = 0; k < shown; ++k) {
        const RegStage& reg = result.regs[k];
        std::cout << "ratio equations (" << reg.label << "):\n";
        print_reg(std::cout, reg);
      }
      if (!result.sliced_times.empty()) {
        std::cout << "loop times:";
        for (const auto& [id, t] : result.sliced_times) std::cout << " " << program.name_of(id) << "=" << t;
        std::cout << "\n";
      }
      if (result.smodel) {
        std::cout << "s-model:\n";
        print_queues(std::cout, *result.smodel, program);
      }
      for (std::size_t k = 0; k < result.fpp_trace.size(); ++k) {
        const FppSnapshot& snap = result.fpp_trace[k];
        std::cout << (k == 0 ? "strings:" : "pool:");
        for (const auto& [id, text] : snap.pool) std::cout << "  " << program.name_of(id) << ": " << text;
        std::cout << "\n";
        for (const std::string& a : snap.actions) std::cout << "  " << a << "\n";
      }
    }
    std::cout << "verdict: " << (result.verdict.is_deadlock() ? "deadlock" : "deadlock-free") << "\n";
    if (result.verdict.deadlock)
      std::cout << "witness (" << witness_kind(*result.verdict.deadlock)
                << "): " << describe(*result.verdict.deadlock, program) << "\n";
  }
  return result.verdict.is_deadlock() ? kDeadlock : kFree;
}

int run_mdg(const std::string& path, const std::string& dot_path) {
  Program program = load(path);
  AnalysisOptions options;
  options.max_events = max_events_from_env();
  auto model = smodel_of(program, options);
  if (auto* v = std::get_if<Verdict>(&model)) {
    std::cerr << "mpicheck: no consistent slice of the infinite loops: " << describe(*v->deadlock, program) << "\n";
    return kUsage;
  }
  Mdg mdg = build_mdg(std::get<EventQueues>(model));
  std::string dot = mdg_to_dot(mdg, program);
  if (dot_path.empty() || dot_path == "-") {
    std::cout << dot;
  } else {
    std::ofstream out(dot_path);
    if (!out) {
      std::cerr << "mpicheck: cannot write " << dot_path << "\n";
      return kUsage;
    }
    out << dot;
  }
  std::cerr << mdg.pairs.size() << " pairs, " << mdg.edge_count() << " edges"
            << (find_cycle(mdg) ? ", cycle found" : ", acyclic") << "\n";
  return kFree;
}

int run_reg(const std::string& path) {
  Program program = load(path);
  print_ranks(std::cout, program);
  RegStage reg;
  auto view = l0_view(program);
  if (view && view->canonical()) {
    reg.label = "loop bodies";
    auto built = build_l0_reg(*view, program);
    if (auto* u = std::get_if<UnmatchedTotals>(&built)) {
      std::cout << "unmatched: " << describe(*u, program) << "\n";
      return kDeadlock;
    }
    reg.group = std::get<RatioEquationGroup>(built);
    RegResult solved = solve(*reg.group);
    if (auto* s = std::get_if<RatioSolution>(&solved))
      reg.solution = *s;
    else
      reg.inconsistent = std::get<Inconsistent>(solved);
  } else {
    StripOutcome strip = strip_outer_infinite(to_power_strings(program), program);
    if (!strip.reg.group && strip.deadlock) {
      std::cout << "unmatched: " << describe(*strip.deadlock->deadlock, program) << "\n";
      return kDeadlock;
    }
    reg = strip.reg;
  }

  if (reg.group->equations().empty() && reg.solution) {
    std::cout << "no equations; " << solution_line(*reg.solution) << "\n";
    return kFree;
  }
  for (const RatioEquation& eq : reg.group->equations()) std::cout << to_string(eq) << "   " << eq.label << "\n";
  if (reg.solution) {
    std::cout << "solution: " << solution_line(*reg.solution) << "\n";
    return kFree;
  }
  std::cout << "inconsistent: " << reg.inconsistent->explanation << "\n";
  std::cout << "clashing equations:\n";
  for (const RatioEquation& eq : reg.inconsistent->witness) std::cout << "  " << to_string(eq) << "   " << eq.label << "\n";
  return kDeadlock;
}

int run_simulate(const std::string& path, std::size_t max_states) {
  Program program = load(path);
  OracleVerdict v = explore(program, max_states);
  print_ranks(std::cout, program);
  std::cout << "verdict: " << to_string(v.kind) << "\n";
  std::cout << "states: " << v.states_explored << "\n";
  if (v.kind != OracleVerdict::Kind::DeadlockReachable) return v.kind == OracleVerdict::Kind::DeadlockFree ? kFree : kInconclusive;
  std::cout << "trace (" << v.trace.size() << " rendezvous):\n";
  for (const Symbol& s : v.trace)
    std::cout << "  " << s.name << ": " << program.name_of(s.src) << " -> " << program.name_of(s.dst) << "\n";
  std::cout << "blocked:";
  for (NodeId id : v.blocked) std::cout << " " << program.name_of(id);
  std::cout << "\nstate:\n";
  for (const std::string& line : v.state) std::cout << "  " << line << "\n";
  return kDeadlock;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deadlock checker for synchronous message-passing programs"};
  app.require_subcommand(1);

  std::string path;
  bool trace = false;
  bool json = false;
  std::string via = "auto";
  auto* check_cmd = app.add_subcommand("check", "Decide deadlock freedom statically");
  check_cmd->add_option("path", path, "Program file (.mdl)")->required();
  check_cmd->add_flag("--trace", trace, "Print intermediate steps");
  check_cmd->add_flag("--json", json, "Emit a JSON report");
  check_cmd->add_option("--via", via, "Engine: auto, smodel, l0 or l2")
      ->check(CLI::IsMember({"auto", "smodel", "l0", "l2"}));

  std::string dot_path;
  auto* mdg_cmd = app.add_subcommand("mdg", "Export the message dependence graph as DOT");
  mdg_cmd->add_option("path", path, "Program file (.mdl)")->required();
  mdg_cmd->add_option("--dot", dot_path, "Output file (default: stdout)");

  auto* reg_cmd = app.add_subcommand("reg", "Print and solve the ratio equations");
  reg_cmd->add_option("path", path, "Program file (.mdl)")->required();

  std::size_t max_states = kDefaultMaxStates;
  auto* sim_cmd = app.add_subcommand("simulate", "Explore every interleaving");
  sim_cmd->add_option("path", path, "Program file (.mdl)")->required();
  sim_cmd->add_option("--max-states", max_states, "State budget")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*check_cmd) return run_check(path, trace, json, via);
    if (*mdg_cmd) return run_mdg(path, dot_path);
    if (*reg_cmd) return run_reg(path);
    if (*sim_cmd) return run_simulate(path, max_states);
  } catch (const ParseError& e) {
    std::cerr << path << ":" << e.what() << "\n";
  } catch (const Error& e) {
    std::cerr << "mpicheck: " << to_string(e.kind()) << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "mpicheck: " << e.what() << "\n";
  }
  return kUsage;
}

#include "mpicheck/check.hpp"

#include <chrono>
#include <set>
#include <sstream>

#include "mpicheck/errors.hpp"

namespace mpicheck {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

nlohmann::json equation_json(const RatioEquation& eq) {
  return {{"i", eq.i}, {"j", eq.j}, {"a", eq.a}, {"b", eq.b}, {"text", to_string(eq)}, {"message", eq.label}};
}

nlohmann::json reg_json(const RegStage& reg) {
  nlohmann::json out;
  out["stage"] = reg.label;
  out["equations"] = nlohmann::json::array();
  if (reg.group)
    for (const RatioEquation& eq : reg.group->equations()) out["equations"].push_back(equation_json(eq));
  if (reg.solution) {
    out["variables"] = nlohmann::json::array();
    out["values"] = nlohmann::json::array();
    for (const auto& [v, x] : reg.solution->values) {
      out["variables"].push_back(v);
      out["values"].push_back(x);
    }
    out["components"] = reg.solution->components;
    out["lcm"] = nlohmann::json::array();
    for (const auto& c : reg.solution->components) out["lcm"].push_back(reg.solution->lcm_of_component(c.front()));
  }
  out["inconsistent"] = reg.inconsistent ? nlohmann::json(reg.inconsistent->explanation) : nlohmann::json();
  return out;
}

std::string event_text(const Symbol& s, NodeId at, const Program& p) {
  return s.src == at ? "send " + s.name + " to " + p.name_of(s.dst) : "recv " + s.name + " from " + p.name_of(s.src);
}

std::string escape_dot(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

Via parse_via(const std::string& text) {
  if (text == "auto") return Via::Auto;
  if (text == "smodel") return Via::SModel;
  if (text == "l0") return Via::L0;
  if (text == "l2") return Via::L2;
  throw std::invalid_argument("unknown engine '" + text + "' (expected auto, smodel, l0 or l2)");
}

const char* to_string(Via via) {
  switch (via) {
    case Via::Auto: return "auto";
    case Via::SModel: return "smodel";
    case Via::L0: return "l0";
    case Via::L2: return "l2";
  }
  return "?";
}

std::variant<EventQueues, Verdict> smodel_of(const Program& program, const AnalysisOptions& options) {
  if (!has_infinite_loop(program)) return unroll(program, options.max_events);
  StripOutcome strip = strip_outer_infinite(to_power_strings(program), program);
  if (strip.deadlock) return *strip.deadlock;
  EventQueues queues;
  std::uint64_t budget = options.max_events;
  for (const auto& [id, s] : strip.strings) {
    queues[id] = flatten(s, budget);
    budget -= queues[id].size();
  }
  return queues;
}

CheckResult check(const Program& program, Via via, const AnalysisOptions& options) {
  CheckResult result;
  result.model_class = classify(program);
  if (via == Via::Auto) {
    if (result.model_class == ModelClass::SModel) {
      via = Via::SModel;
    } else if (result.model_class == ModelClass::L0) {
      auto view = l0_view(program);
      via = view && view->canonical() ? Via::L0 : Via::L2;
    } else {
      via = Via::L2;
    }
  }
  result.phase = to_string(via);

  auto start = Clock::now();
  switch (via) {
    case Via::SModel: {
      auto model = smodel_of(program, options);
      result.timings_ms.emplace_back("slice", ms_since(start));
      if (auto* v = std::get_if<Verdict>(&model)) {
        result.verdict = *v;
        break;
      }
      result.smodel = std::get<EventQueues>(model);
      start = Clock::now();
      result.verdict = check_smodel(*result.smodel, SModelOptions{options.verify});
      result.timings_ms.emplace_back("smodel", ms_since(start));
      break;
    }
    case Via::L0: {
      L0Result r = check_l0(program, options);
      result.timings_ms.emplace_back("l0", ms_since(start));
      result.verdict = std::move(r.verdict);
      RegStage reg;
      reg.label = "loop bodies";
      reg.group = r.trace.group;
      reg.solution = r.trace.solution;
      if (reg.group) result.regs.push_back(std::move(reg));
      result.sliced_times = std::move(r.trace.sliced_times);
      result.smodel = std::move(r.trace.smodel);
      break;
    }
    case Via::L2: {
      L2Result r = check_l2(program, options);
      result.timings_ms.emplace_back("l2", ms_since(start));
      result.verdict = std::move(r.verdict);
      result.regs = std::move(r.regs);
      result.sliced_times = std::move(r.strip.replication);
      result.fpp_trace = std::move(r.trace);
      break;
    }
    case Via::Auto:
      break;
  }
  return result;
}

nlohmann::json witness_json(const DeadlockWitness& w, const Program& program) {
  nlohmann::json out;
  out["kind"] = witness_kind(w);
  out["description"] = describe(w, program);
  std::visit(overloaded{
                 [&](const StuckQueues& s) {
                   nlohmann::json rem = nlohmann::json::object();
                   for (const auto& [id, events] : s.remaining) {
                     if (events.empty()) continue;
                     auto& list = rem[program.name_of(id)] = nlohmann::json::array();
                     for (const Symbol& e : events) list.push_back(event_text(e, id, program));
                   }
                   out["remaining"] = rem;
                 },
                 [&](const MdgCycle& c) {
                   out["pairs"] = nlohmann::json::array();
                   for (const MatchedPair& p : c.pairs) out["pairs"].push_back(pair_label(p, program));
                 },
                 [&](const UnmatchedTotals& u) {
                   out["message"] = u.sym.name;
                   out["from"] = program.name_of(u.sym.src);
                   out["to"] = program.name_of(u.sym.dst);
                   out["sends"] = u.sends;
                   out["recvs"] = u.recvs;
                 },
                 [&](const RatioInconsistency& r) {
                   out["reason"] = r.reason;
                   out["equations"] = nlohmann::json::array();
                   for (const RatioEquation& eq : r.equations) out["equations"].push_back(equation_json(eq));
                 },
                 [&](const FppStuck& f) {
                   nlohmann::json snap = nlohmann::json::object();
                   for (const auto& [id, text] : f.snapshot) snap[program.name_of(id)] = text;
                   out["snapshot"] = snap;
                 },
             },
             w);
  return out;
}

nlohmann::json to_json(const CheckResult& result, const Program& program) {
  nlohmann::json out;
  out["verdict"] = result.verdict.is_deadlock() ? "deadlock" : "deadlock-free";
  out["class"] = to_string(result.model_class);
  out["phase"] = result.phase;
  out["nodes"] = nlohmann::json::array();
  for (const Node& n : program.nodes) {
    nlohmann::json node = {{"rank", n.id.value}, {"name", program.name_of(n.id)}};
    if (n.body.empty()) node["empty"] = true;
    out["nodes"].push_back(std::move(node));
  }
  out["witness"] = result.verdict.deadlock ? witness_json(*result.verdict.deadlock, program) : nlohmann::json();
  out["regSolutions"] = nlohmann::json::array();
  for (const RegStage& reg : result.regs) out["regSolutions"].push_back(reg_json(reg));
  nlohmann::json times = nlohmann::json::object();
  for (const auto& [id, t] : result.sliced_times) times[program.name_of(id)] = t;
  out["slicedTimes"] = times;
  out["fppTrace"] = nlohmann::json::array();
  for (const FppSnapshot& snap : result.fpp_trace) {
    nlohmann::json pool = nlohmann::json::object();
    for (const auto& [id, text] : snap.pool) pool[program.name_of(id)] = text;
    out["fppTrace"].push_back({{"pool", pool}, {"actions", snap.actions}});
  }
  nlohmann::json timings = nlohmann::json::object();
  for (const auto& [stage, ms] : result.timings_ms) timings[stage] = ms;
  out["timings"] = timings;
  return out;
}

std::string mdg_to_dot(const Mdg& mdg, const Program& names) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> on_cycle;
  if (auto cycle = find_cycle(mdg)) {
    for (std::size_t k = 0; k < cycle->size(); ++k)
      on_cycle.emplace((*cycle)[k], (*cycle)[(k + 1) % cycle->size()]);
  }
  std::ostringstream out;
  out << "digraph mdg {\n";
  out << "  node [shape=box];\n";
  for (std::size_t k = 0; k < mdg.pairs.size(); ++k)
    out << "  p" << k << " [label=\"" << escape_dot(pair_label(mdg.pairs[k], names)) << "\"];\n";
  for (std::size_t k = 0; k < mdg.unpaired.size(); ++k) {
    const UnpairedEvent& u = mdg.unpaired[k];
    out << "  u" << k << " [label=\"" << escape_dot(names.name_of(u.node) + ": " + event_text(u.sym, u.node, names))
        << " (unpaired)\", style=dashed];\n";
  }
  for (std::size_t from = 0; from < mdg.successors.size(); ++from) {
    for (std::uint32_t to : mdg.successors[from]) {
      out << "  p" << from << " -> p" << to;
      if (on_cycle.count({static_cast<std::uint32_t>(from), to})) out << " [color=red, penwidth=2]";
      out << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace mpicheck

#pragma once

// Front door: dispatch a validated program to the right engine and build a
// machine-readable report.

#include <optional>
#include <string>
#include <utility>
#include <map>
#include <variant>
#include <vector>

#include "mpicheck/l0.hpp"
#include "mpicheck/l2.hpp"
#include "mpicheck/model.hpp"
#include "mpicheck/smodel.hpp"
#include "mpicheck/verdict.hpp"

#include <json.hpp>

namespace mpicheck {

enum class Via { Auto, SModel, L0, L2 };

Via parse_via(const std::string& text);
const char* to_string(Via via);

struct CheckResult {
  Verdict verdict;
  ModelClass model_class = ModelClass::SModel;
  // Engine that produced the verdict: "smodel", "l0" or "l2".
  std::string phase;
  std::vector<RegStage> regs;
  std::map<NodeId, std::uint64_t> sliced_times;
  std::optional<EventQueues> smodel;
  std::vector<FppSnapshot> fpp_trace;
  std::vector<std::pair<std::string, double>> timings_ms;
};

// Loop-free event queues equivalent to the program: plain unrolling for
// finite programs, one balanced round of every infinite loop otherwise.
// Returns the deadlock verdict instead when no balanced round exists.
std::variant<EventQueues, Verdict> smodel_of(const Program& program, const AnalysisOptions& options = {});

// `program` must be validated. Throws NotApplicable when `via` forces an
// engine that cannot handle the program.
CheckResult check(const Program& program, Via via = Via::Auto, const AnalysisOptions& options = {});

// Stable report shape (see README). Timings are the only unstable field.
nlohmann::json to_json(const CheckResult& result, const Program& program);

nlohmann::json witness_json(const DeadlockWitness& w, const Program& program);

// Contracted MDG in DOT; edges on the reported cycle are drawn red.
std::string mdg_to_dot(const Mdg& mdg, const Program& names);

}  // namespace mpicheck

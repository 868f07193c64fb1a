#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "mpicheck/check.hpp"
#include "mpicheck/errors.hpp"
#include "mpicheck/oracle.hpp"
#include "mpicheck/parser.hpp"

namespace py = pybind11;
using namespace mpicheck;

namespace {

Program load(const std::string& text) { return validate(parse(text)); }

std::string check_json(const std::string& text, const std::string& via, bool trace, std::uint64_t max_events) {
  Program program = load(text);
  AnalysisOptions options;
  options.trace = trace;
  options.max_events = max_events;
  return to_json(check(program, parse_via(via), options), program).dump();
}

py::dict simulate(const std::string& text, std::size_t max_states) {
  Program program = load(text);
  OracleVerdict v = explore(program, max_states);
  py::list trace;
  for (const Symbol& s : v.trace) trace.append(py::make_tuple(s.name, program.name_of(s.src), program.name_of(s.dst)));
  py::list blocked;
  for (NodeId id : v.blocked) blocked.append(program.name_of(id));
  py::dict out;
  out["verdict"] = to_string(v.kind);
  out["states"] = v.states_explored;
  out["trace"] = trace;
  out["blocked"] = blocked;
  out["state"] = v.state;
  return out;
}

std::string mdg_dot(const std::string& text, std::uint64_t max_events) {
  Program program = load(text);
  AnalysisOptions options;
  options.max_events = max_events;
  auto model = smodel_of(program, options);
  if (auto* v = std::get_if<Verdict>(&model))
    throw py::value_error("no consistent slice of the infinite loops: " + describe(*v->deadlock, program));
  return mdg_to_dot(build_mdg(std::get<EventQueues>(model)), program);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  static py::exception<ParseError> parse_error(m, "ParseError", PyExc_ValueError);
  static py::exception<Error> model_error(m, "ModelError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      py::set_error(parse_error, e.what());
    } catch (const Error& e) {
      py::set_error(model_error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def("render", [](const std::string& text) { return render(parse(text)); }, py::arg("text"));
  m.def("validate", [](const std::string& text) { return render(load(text)); }, py::arg("text"));
  m.def("classify", [](const std::string& text) { return std::string(to_string(classify(load(text)))); },
        py::arg("text"));
  m.def("check_json", &check_json, py::arg("text"), py::arg("via") = "auto", py::arg("trace") = false,
        py::arg("max_events") = kDefaultMaxEvents);
  m.def("simulate", &simulate, py::arg("text"), py::arg("max_states") = kDefaultMaxStates);
  m.def("mdg_dot", &mdg_dot, py::arg("text"), py::arg("max_events") = kDefaultMaxEvents);
}

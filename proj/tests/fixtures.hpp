#pragma once

#include <string>

#include "mpicheck/model.hpp"
#include "mpicheck/parser.hpp"

namespace fixtures {

inline mpicheck::Symbol sym(const char* name, std::uint32_t src, std::uint32_t dst) {
  return mpicheck::Symbol{name, mpicheck::NodeId{src}, mpicheck::NodeId{dst}};
}

inline std::string model_path(const std::string& name) { return std::string(MPICHECK_MODELS_DIR) + "/" + name; }

inline mpicheck::Program load(const std::string& name) {
  return mpicheck::validate(mpicheck::parse_file(model_path(name)));
}

}  // namespace fixtures

#pragma once

#include <string>
#include <string_view>

#include "mpicheck/model.hpp"

namespace mpicheck {

// Parses .mdl text:
//
//   program := node+
//   node    := "node" IDENT "{" stmt* "}"
//   stmt    := "send" IDENT "to" IDENT
//            | "recv" IDENT "from" IDENT
//            | "for" ("inf" | INTEGER) "{" stmt* "}"
//
// Newlines and commas separate statements, '#' starts a line comment.
// Node names get ranks in declaration order. The result is not validated.
Program parse(std::string_view text);

// Canonical text: two-space indentation, one statement per line.
std::string render(const Program& program);

Program parse_file(const std::string& path);

}  // namespace mpicheck

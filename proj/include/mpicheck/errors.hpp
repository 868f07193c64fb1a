#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mpicheck {

enum class ErrorKind {
  // validation
  EmptyProgram,
  DuplicateNode,
  SelfMessage,
  MisplacedOperation,
  DanglingEndpoint,
  NestedInfinite,
  InfiniteNotSole,
  EmptyLoop,
  // analysis
  InfiniteInside,
  InfiniteLoop,
  SizeExceeded,
  Overflow,
  NotApplicable,
  InternalDisagreement,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the .mdl parser. Always carries a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  enum class Kind { Lex, Syntax };

  ParseError(Kind kind, std::size_t line, std::size_t column, const std::string& message);

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Kind kind_;
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

}  // namespace mpicheck

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qforest {

/// Precondition violated by the caller (bad dimensions, out-of-range values).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix, model or feature has no usable non-degenerate part.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quantity is mathematically undefined for the given input.
class UndefinedValue : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qforest

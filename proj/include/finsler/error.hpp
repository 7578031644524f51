#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

// Base class for every error thrown by this library. Callers that only
// want to distinguish "bad input" from "bug" can catch this type alone.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed expression text. Carries a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(msg + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Evaluation hit a point outside the domain of an operation
// (log of a non-positive value, division by zero, metric degenerate, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation does not hold for the given
// arguments (wrong dimensions, norm bound violated, field not parallel, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace finsler

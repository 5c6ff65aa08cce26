#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace puprior {

// Arguments violate a precondition (wrong shapes, out-of-range parameters).
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Structurally valid input that produced an unusable result
// (empty sample split, all-equal scores, exhausted bootstrap coverage).
class DegenerateOutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A mixture component lost all responsibility mass; the caller restarts.
class DegenerateComponentError : public DegenerateOutputError {
 public:
  using DegenerateOutputError::DegenerateOutputError;
};

// Every attempt of an estimator failed; message carries diagnostics.
class EstimationFailedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File-format problems; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace puprior

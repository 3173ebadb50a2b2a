#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace homlab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: unknown preset, malformed config, violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A coefficient field failed the symmetry or ellipticity audit.
class NotElliptic : public Error {
 public:
  using Error::Error;
};

// Iterative solver hit its cap. Carries the relative residual history.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : Error(what), residual_history_(std::move(history)) {}

  const std::vector<double>& residual_history() const noexcept { return residual_history_; }

 private:
  std::vector<double> residual_history_;
};

}  // namespace homlab

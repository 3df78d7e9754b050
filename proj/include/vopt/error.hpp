#pragma once

#include <stdexcept>
#include <string>

namespace vopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operand sizes disagree (objective-space vectors, transform rows, ...).
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Invalid cone, problem, or solver configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// NaN/Inf produced by an objective, Jacobian, or iterate.
class NumericError : public Error {
public:
  using Error::Error;
};

/// Backtracking exhausted its trial budget.
class LineSearchError : public Error {
public:
  LineSearchError(const std::string& what, int trials, double last_step)
      : Error(what), trials_(trials), last_step_(last_step) {}

  int trials() const noexcept { return trials_; }
  double last_step() const noexcept { return last_step_; }

private:
  int trials_;
  double last_step_;
};

} // namespace vopt

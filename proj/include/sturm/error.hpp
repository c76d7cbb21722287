#pragma once

#include <stdexcept>
#include <string>

namespace sturm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid problem parameters or options (CLI exit status 2).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An iteration, panel or bracketing budget ran out (CLI exit status 3).
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, double bestValue = 0.0, double errorEstimate = 0.0)
      : Error(what), bestValue_(bestValue), errorEstimate_(errorEstimate) {}

  double bestValue() const noexcept { return bestValue_; }
  double errorEstimate() const noexcept { return errorEstimate_; }

 private:
  double bestValue_;
  double errorEstimate_;
};

/// Internally inconsistent numerics: non-monotone mismatch, ambiguous branch,
/// non-finite coefficients (CLI exit status 4).
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested outside the domain, e.g. at the singular point x = 0.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace sturm

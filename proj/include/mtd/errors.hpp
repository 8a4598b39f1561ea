#pragma once

#include <stdexcept>
#include <string>

namespace mtd {

// Every failure in the library maps onto one of three categories, chosen so a
// caller (or the CLI) can turn an exception into a process exit code without
// string matching:
//
//   ValidationError -> bad input: malformed files, out-of-range parameters,
//                      contract violations (code 2)
//   InfeasibleError -> the request is well-formed but has no solution, e.g.
//                      a required occupancy above the achievable bound (code 3)
//   NumericalError  -> an iteration failed to converge or a numerical
//                      cross-check disagreed beyond tolerance (code 4)
class Error : public std::runtime_error {
 public:
  enum class Code : int { Validation = 2, Infeasible = 3, Numerical = 4 };

  Error(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Code code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

 private:
  Code code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(Code::Validation, what) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(Code::Infeasible, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(Code::Numerical, what) {}
};

// Raised when the spectral power iteration runs out of iterations.  Carries
// the last Rayleigh/Collatz-Wielandt estimate so callers can report how far
// the iteration got.
class SpectralIterationError : public NumericalError {
 public:
  SpectralIterationError(const std::string& what, double last_estimate)
      : NumericalError(what), last_estimate_(last_estimate) {}

  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

}  // namespace mtd

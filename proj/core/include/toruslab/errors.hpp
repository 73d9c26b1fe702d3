#pragma once

#include <stdexcept>
#include <string>

namespace toruslab {

// Invalid parameters, configs or inputs.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure. code() names the failure mode, e.g. "NoConvergence".
class SolverError : public std::runtime_error {
 public:
  SolverError(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace toruslab

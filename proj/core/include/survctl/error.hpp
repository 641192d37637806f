#pragma once

#include <stdexcept>
#include <string>

namespace survctl {

enum class ErrorCode {
  kDomain,       // argument outside the mathematical domain
  kRegime,       // drift outside the solver's nonnegative-drift regime
  kDependency,   // missing lower-dimensional data
  kConvergence,  // solver did not reach tolerance
  kFormat,       // grid file version / checksum / shape problems
  kKind,         // V-grid where a U-grid was expected or vice versa
  kProvenance,   // mismatched parameters between artifacts
  kConfig,       // inconsistent configuration
  kIo,           // unreadable or unwritable path
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when the outer policy iteration exhausts its budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_change, int iterations)
      : Error(ErrorCode::kConvergence, what),
        last_change_(last_change),
        iterations_(iterations) {}

  double last_change() const noexcept { return last_change_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_change_;
  int iterations_;
};

}  // namespace survctl

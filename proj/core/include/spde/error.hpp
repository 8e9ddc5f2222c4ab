#pragma once

#include <stdexcept>
#include <string>

namespace spde {

enum class ErrorCode {
  kInvalidDomain,
  kGridTooSmall,
  kInvalidArgument,
  kDimensionMismatch,
  kSingularMatrix,
  kNonConvergence,
  kDivisionByZero,
  kUnsupportedCombination,
  kDegenerateRegression,
  kBlowUp,
  kEmptyInput,
  kIoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Library-wide exception. Every failure the library reports carries a code
/// so that front ends can map it onto exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace spde

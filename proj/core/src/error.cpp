#include "spde/error.hpp"

namespace spde {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidDomain:
      return "invalid-domain";
    case ErrorCode::kGridTooSmall:
      return "grid-too-small";
    case ErrorCode::kInvalidArgument:
      return "invalid-argument";
    case ErrorCode::kDimensionMismatch:
      return "dimension-mismatch";
    case ErrorCode::kSingularMatrix:
      return "singular-matrix";
    case ErrorCode::kNonConvergence:
      return "non-convergence";
    case ErrorCode::kDivisionByZero:
      return "division-by-zero";
    case ErrorCode::kUnsupportedCombination:
      return "unsupported-combination";
    case ErrorCode::kDegenerateRegression:
      return "degenerate-regression";
    case ErrorCode::kBlowUp:
      return "blow-up";
    case ErrorCode::kEmptyInput:
      return "empty-input";
    case ErrorCode::kIoError:
      return "io-error";
  }
  return "unknown";
}

}  // namespace spde

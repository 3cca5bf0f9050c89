#include "skewdim/error.hpp"

namespace skewdim {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kCriticalPoint: return "critical_point";
    case ErrorCode::kSlowEscape: return "slow_escape";
    case ErrorCode::kNotInBasin: return "not_in_basin";
    case ErrorCode::kBranchAmbiguity: return "branch_ambiguity";
    case ErrorCode::kNewtonDivergence: return "newton_divergence";
    case ErrorCode::kOnCircle: return "on_circle";
    case ErrorCode::kUnsupportedBaseDegree: return "unsupported_base_degree";
    case ErrorCode::kBudgetExceeded: return "budget_exceeded";
    case ErrorCode::kNonHyperbolicContinuation: return "non_hyperbolic_continuation";
    case ErrorCode::kRootFindingFailure: return "root_finding_failure";
    case ErrorCode::kNoBracket: return "no_bracket";
    case ErrorCode::kDegenerateGrid: return "degenerate_grid";
    case ErrorCode::kParseError: return "parse_error";
    case ErrorCode::kValidationError: return "validation_error";
  }
  return "unknown";
}

}  // namespace skewdim

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skewdim {

enum class ErrorCode {
  kInvalidArgument,
  kCriticalPoint,
  kSlowEscape,
  kNotInBasin,
  kBranchAmbiguity,
  kNewtonDivergence,
  kOnCircle,
  kUnsupportedBaseDegree,
  kBudgetExceeded,
  kNonHyperbolicContinuation,
  kRootFindingFailure,
  kNoBracket,
  kDegenerateGrid,
  kParseError,
  kValidationError,
};

// Stable machine-readable name, used in CLI error JSON.
std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace skewdim

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vecspin {

enum class ErrorCode {
  DomainError,
  NotPositiveDefinite,
  DimensionMismatch,
  OrderOutOfRange,
  InvalidTruncation,
  SingularD,
  MonotonicityViolation,
  SingularLambda,
  DegenerateKnots,
  InvalidThat,
  SingularPath,
  InfeasibleTriple,
  NoFeasibleStart,
  DegenerateDerivative,
  BetaTooSmall,
  RootNotBracketed,
  MemoryBudgetExceeded,
  NonPDConstraint,
  IllConditionedFit,
  Validation,
};

std::string_view to_string(ErrorCode code) noexcept;

// Numerical failures (singularities, infeasibility) as opposed to bad input.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace vecspin

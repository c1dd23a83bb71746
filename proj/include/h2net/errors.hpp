#pragma once

#include <stdexcept>
#include <string>

namespace h2net {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NotHurwitz,
  NotSymmetric,
  NotPositiveDefinite,
  NotOrthogonal,
  NotMMatrix,
  NotSemistable,
  FullyStable,
  RankTooLarge,
  Infeasible,
  NumericalFailure,
  NoSolutionFound,
  DisconnectedAfterRetries,
  ParseError,
  SchemaError,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace h2net

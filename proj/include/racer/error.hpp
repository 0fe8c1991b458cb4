#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace racer {

enum class ErrorCode {
  Io,
  Parse,
  Schema,
  DuplicateId,
  DegenerateSplit,
  InvalidParameter,
  InvalidScore,
  AlreadySmoothed,
  MissingRow,
  AlphaInfeasible,
  EmptyCalibration,
  KindMismatch,
  SmoothingMismatch,
  MissingAnswer,
  MissingWeight,
  EmptyGrid,
  EmptyValidation,
  Misalignment,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `code()` identifies the failure class;
/// the message carries the offending record, line, or value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when no threshold can satisfy the risk bound; carries 1/(n+1).
class AlphaInfeasibleError : public Error {
 public:
  AlphaInfeasibleError(double alpha, std::size_t n);

  double alpha() const noexcept { return alpha_; }
  double min_feasible_alpha() const noexcept { return min_alpha_; }
  std::size_t n() const noexcept { return n_; }

 private:
  double alpha_;
  double min_alpha_;
  std::size_t n_;
};

}  // namespace racer

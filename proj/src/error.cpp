#include "racer/error.hpp"

#include "racer/json_io.hpp"

namespace racer {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Schema: return "SchemaError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidScore: return "InvalidScore";
    case ErrorCode::AlreadySmoothed: return "AlreadySmoothed";
    case ErrorCode::MissingRow: return "MissingRow";
    case ErrorCode::AlphaInfeasible: return "AlphaInfeasible";
    case ErrorCode::EmptyCalibration: return "EmptyCalibration";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::SmoothingMismatch: return "SmoothingMismatch";
    case ErrorCode::MissingAnswer: return "MissingAnswer";
    case ErrorCode::MissingWeight: return "MissingWeight";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::EmptyValidation: return "EmptyValidation";
    case ErrorCode::Misalignment: return "Misalignment";
  }
  return "Error";
}

AlphaInfeasibleError::AlphaInfeasibleError(double alpha, std::size_t n)
    : Error(ErrorCode::AlphaInfeasible,
            "alpha=" + json_io::format_double(alpha) + " is below 1/(n+1)=" +
                json_io::format_double(1.0 / static_cast<double>(n + 1)) + " for n=" + std::to_string(n) +
                " calibration queries"),
      alpha_(alpha),
      min_alpha_(1.0 / static_cast<double>(n + 1)),
      n_(n) {}

}  // namespace racer

#include "elaudit/error.hpp"

namespace elaudit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Domain: return "domain error";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::NoConvergence: return "no convergence";
    case ErrorCode::MissingColumn: return "missing column";
    case ErrorCode::NonNumeric: return "non-numeric column";
    case ErrorCode::TypeMismatch: return "type mismatch";
    case ErrorCode::EmptyGroup: return "empty group";
    case ErrorCode::DegenerateVariance: return "degenerate variance";
    case ErrorCode::SingularCovariance: return "singular covariance";
    case ErrorCode::InvalidInterval: return "invalid interval";
    case ErrorCode::BracketFailure: return "bracket failure";
    case ErrorCode::EmptyGroupResample: return "empty group in resample";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Schema: return "schema error";
    case ErrorCode::Config: return "config error";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace elaudit

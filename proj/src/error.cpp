#include "ipsm/error.hpp"

namespace ipsm {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::GenerationFailure: return "GenerationFailure";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::UnknownFamily: return "UnknownFamily";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroDiagonal: return "ZeroDiagonal";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace ipsm

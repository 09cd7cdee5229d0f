#pragma once

#include <stdexcept>
#include <string>

namespace ipsm {

enum class ErrorCode {
  ZeroRow,
  NegativeEntry,
  EmptySet,
  TooLarge,
  AllZero,
  NonSquare,
  ParseError,
  GenerationFailure,
  NonConvergent,
  AssumptionViolated,
  DomainError,
  UnknownFamily,
  DimensionMismatch,
  ZeroDiagonal,
  InvalidArgument,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure the library reports carries one of the codes above so that
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ipsm

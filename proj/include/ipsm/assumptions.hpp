#pragma once

#include <bit>
#include <cmath>
#include <string>

#include "ipsm/error.hpp"

namespace ipsm {

/// ceil(log2 n) for n >= 1.
constexpr int ceil_log2(int n) { return n <= 1 ? 0 : std::bit_width(static_cast<unsigned>(n - 1)); }

/// Shortest communication interval (n - 1) * ceil(log2 n).
constexpr long communication_interval(int n) { return static_cast<long>(n - 1) * ceil_log2(n); }

/// Constants of the lower-bound schedule on positive entries:
/// min over block s of beta_t >= (delta / (s + 1)^lambda)^(1 / B).
///
/// delta is held as its natural log so that negligible values such as
/// 10^(-64 n log2 n) stay representable.
class AssumptionParams {
 public:
  AssumptionParams() = default;
  AssumptionParams(int n, double delta, double lambda) : AssumptionParams(n, std::log(delta), lambda, 0) {
    if (!(delta > 0.0 && delta <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1]");
  }

  static AssumptionParams from_log10_delta(int n, double log10_delta, double lambda) {
    if (!(log10_delta <= 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1]");
    return AssumptionParams(n, log10_delta * std::log(10.0), lambda, 0);
  }

  int n() const { return n_; }
  double lambda() const { return lambda_; }
  double log_delta() const { return log_delta_; }
  double delta() const { return std::exp(log_delta_); }
  long B() const { return communication_interval(n_); }

  /// log of (delta / (block + 1)^lambda)^(1/B), block >= 1.
  double log_schedule(long block) const {
    return (log_delta_ - lambda_ * std::log(static_cast<double>(block + 1))) / static_cast<double>(B());
  }

 private:
  AssumptionParams(int n, double log_delta, double lambda, int) : n_(n), log_delta_(log_delta), lambda_(lambda) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "n must be at least 2");
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorCode::InvalidArgument, "lambda must lie in (0, 1)");
    if (!std::isfinite(log_delta)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  }

  int n_ = 6;
  double log_delta_ = std::log(0.5);
  double lambda_ = 0.5;
};

}  // namespace ipsm

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ipsm/assumptions.hpp"
#include "ipsm/stochastic.hpp"
#include "ipsm/topology.hpp"

namespace ipsm {

/// gamma_t^s = delta / (floor(s/B) + t + 1)^lambda.
template <typename Scalar = double>
Scalar gamma_ts(const AssumptionParams& params, long s, long t) {
  if (s < 0 || t < 0) throw Error(ErrorCode::InvalidArgument, "s and t must be nonnegative");
  const Scalar base = Scalar(s / params.B() + t + 1);
  return std::exp(Scalar(params.log_delta()) - Scalar(params.lambda()) * std::log(base));
}

template <typename Scalar = double>
struct BasicConvergenceBound {
  long s = 0;
  long k = 0;
  Scalar value = 0;       // truncated evaluation of Gamma(s, k)
  Scalar tail_error = 0;  // certified bound on the neglected remainder
  long terms_used = 0;

  /// value + tail_error >= Gamma(s, k).
  Scalar upper() const { return value + tail_error; }
};

using ConvergenceBound = BasicConvergenceBound<double>;

inline constexpr long kGammaTermCap = 10'000'000;

/// Gamma(s, k) = prod_{t=0}^{m} (1 - g_t) + sum_{t=m}^{inf} prod_{r=0}^{t} (1 - g_r),
/// m = floor((k - s) / B), g_t = gamma_t^s, and Gamma(l, k) = Gamma(k, k) for l > k.
///
/// The series is summed term by term until the remainder after index T,
///   R_T <= P_T * sum_{t>T} exp(-sum_{r=T+1}^{t} g_r),
/// is certified below `tol`. With g_r decreasing, the inner sum is bounded
/// below by an integral, and the outer sum by an upper incomplete gamma
/// integral, which gives
///   R_T <= P_T * U^lambda / delta * z / (z - lambda/(1-lambda)),
///   U = floor(s/B) + T + 2,  z = delta U^(1-lambda) / (1-lambda),
/// whenever z > lambda/(1-lambda).
template <typename Scalar = double>
BasicConvergenceBound<Scalar> gamma_bound(const AssumptionParams& params, long s, long k,
                                          Scalar tol = Scalar(1e-10), long term_cap = kGammaTermCap) {
  if (s < 0) throw Error(ErrorCode::InvalidArgument, "s must be nonnegative");
  if (!(tol > 0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  BasicConvergenceBound<Scalar> out;
  out.s = s;
  out.k = k;
  if (s > k) s = k;
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "k must be nonnegative");

  const long B = params.B();
  const long m = (k - s) / B;
  const long c = s / B;
  const Scalar lambda = Scalar(params.lambda());
  const Scalar delta = Scalar(params.delta());
  const Scalar p = Scalar(1) - lambda;
  const Scalar q_minus_one = lambda / p;
  if (!(delta > 0))
    throw Error(ErrorCode::NonConvergent, "delta underflows to zero; Gamma is not finite at this precision");

  auto certified_tail = [&](long T, Scalar P_T) -> Scalar {
    if (P_T == Scalar(0)) return Scalar(0);
    const Scalar U = Scalar(c + T + 2);
    const Scalar z = delta / p * std::pow(U, p);
    if (z <= q_minus_one) return std::numeric_limits<Scalar>::infinity();
    return P_T * std::pow(U, lambda) / delta * z / (z - q_minus_one);
  };

  Scalar product = Scalar(1);
  Scalar sum = Scalar(0);
  Scalar head = Scalar(0);
  for (long t = 0; t < term_cap; ++t) {
    product *= Scalar(1) - gamma_ts<Scalar>(params, s, t);
    if (t == m) head = product;
    if (t >= m) {
      sum += product;
      const Scalar tail = certified_tail(t, product);
      if (tail <= tol) {
        out.value = head + sum;
        out.tail_error = tail;
        out.terms_used = t + 1;
        return out;
      }
    }
  }
  throw Error(ErrorCode::NonConvergent, "Gamma tail not below tol within " +
                                            std::to_string(term_cap) + " terms");
}

struct AbsoluteProbabilityEstimate {
  long s = 0;
  long horizon = 0;
  Eigen::RowVectorXd pi_hat;
  double spread_at_K = 0.0;
};

/// pi_hat(s) = column-wise mean of the rows of Phi(s, K); the row spread of
/// Phi(s, K) bounds the distance of every row from the mean.
template <MatrixSource Seq>
AbsoluteProbabilityEstimate estimate_pi(const Seq& seq, long s, long K) {
  if (K < s) throw Error(ErrorCode::InvalidArgument, "horizon K must be at least s");
  const auto phi = backward_product(seq, s, K);
  AbsoluteProbabilityEstimate est;
  est.s = s;
  est.horizon = K;
  est.pi_hat = phi.value.entries().colwise().mean();
  est.pi_hat /= est.pi_hat.sum();
  est.spread_at_K = row_spread(phi.value);
  return est;
}

double pi_uniform_gap(const AbsoluteProbabilityEstimate& est);

struct Prop1Report {
  long s = 0;
  long k = 0;
  long K = 0;
  double deviation = 0.0;  // max_ij |Phi_ij(s,k) - pi_hat_j(s)|
  ConvergenceBound gamma;
  double spread_at_K = 0.0;
  bool dominated = false;  // deviation <= Gamma + spread_at_K + 1e-9
  bool assumption_satisfied = true;
  std::optional<long> first_violating_block;
};

/// Compares the realized deviation of Phi(s, k) from the estimated limit
/// against Gamma(s, k). The realized beta trace over [0, max(k+1, B)) is
/// checked against the schedule; a violation flags the report (the bound is
/// then not guaranteed) and throws AssumptionViolated only when `strict`.
template <MatrixSource Seq>
Prop1Report verify_prop1(const Seq& seq, const AssumptionParams& params, long s, long k, long K,
                         bool strict = false, double tol = 1e-10) {
  if (k < s) throw Error(ErrorCode::InvalidArgument, "k must be at least s");
  if (K < k) throw Error(ErrorCode::InvalidArgument, "K must be at least k");
  Prop1Report r;
  r.s = s;
  r.k = k;
  r.K = K;
  const auto est = estimate_pi(seq, s, K);
  const auto phi = backward_product(seq, s, k);
  r.deviation = (phi.value.entries().rowwise() - est.pi_hat).cwiseAbs().maxCoeff();
  r.spread_at_K = est.spread_at_K;
  r.gamma = gamma_bound(params, s, k, tol);
  r.dominated = r.deviation <= r.gamma.upper() + r.spread_at_K + 1e-9;

  const auto schedule = beta_schedule_check(seq, params, std::max(k + 1, params.B()));
  r.first_violating_block = schedule.first_violating_block;
  r.assumption_satisfied = schedule.schedule_ok() && schedule.connectivity_ok;
  if (strict && !r.assumption_satisfied)
    throw Error(ErrorCode::AssumptionViolated,
                "realized beta trace falls below the schedule; the bound is not guaranteed");
  return r;
}

/// Labels for partial-sum growth. These are trend heuristics at a finite
/// horizon, not proofs.
enum class SeriesVerdict { Summable, Divergent, Inconclusive };
std::string to_string(SeriesVerdict v);

/// Compares the increment of partial sums over the last decade [H/10, H]
/// with the previous decade [H/100, H/10]: a ratio below 0.7 reads as
/// summable, a ratio at or above it as divergent. Needs H >= 100.
SeriesVerdict decade_trend(const std::vector<double>& partial_sums);

using Sample = std::pair<long, double>;

struct SeriesDiagnostics {
  long horizon = 0;
  std::vector<double> partial_products;  // index k-1 holds prod_{t=1}^{k} (1 - x_t)
  std::vector<double> partial_sums;      // index k-1 holds sum_{j<=k} prod_{t=1}^{j} (1 - x_t)
  std::vector<Sample> tail_probe;        // k^mu * sum_{r=k}^{H} prod_{t<=r} (1 - x_t)
  std::vector<Sample> corollary_partial; // sum_{j<=k} sum_{r=j}^{H} prod_{t=1}^{r} (1 - x_{t+j}) y_j
  double mu = 1.0;
  bool product_vanishes = false;
  SeriesVerdict part1 = SeriesVerdict::Inconclusive;
  bool tail_probe_decreasing = false;
  SeriesVerdict corollary = SeriesVerdict::Inconclusive;
};

struct SeriesOptions {
  double mu = 1.0;
  double vanish_threshold = 1e-8;
  std::function<double(long)> y;  // summable weights for the double sum; skipped when empty
  long corollary_horizon = 2000;
};

/// Diagnostics for prod (1 - x_t)-type sequences, x indexed from 1.
/// Throws DomainError if any evaluated x_k lies outside (0, 1).
SeriesDiagnostics series_diagnostics(const std::function<double(long)>& x, long horizon,
                                     const SeriesOptions& options = {});

struct Assumption2Report {
  long N = 0;
  long horizon = 0;
  std::vector<double> identity_gap_sums;  // sum_{j<=k} (1/j) ||I - A(j)||_max
  std::vector<double> omega;              // omega_k = max_i (1 - Phi_ii(k, k+N-1))
  std::vector<double> omega_log_sums;     // sum_{j<=k} omega_j ln j
  double chi = 0.0;                       // sup_k sum_i 1/A_ii(k)
  SeriesVerdict identity_gap_verdict = SeriesVerdict::Inconclusive;
  SeriesVerdict omega_log_verdict = SeriesVerdict::Inconclusive;

  bool jointly_summable() const {
    return identity_gap_verdict == SeriesVerdict::Summable && omega_log_verdict == SeriesVerdict::Summable;
  }
};

/// Evaluates k = 1 .. horizon. ln 1 is taken as 0.
template <MatrixSource Seq>
Assumption2Report assumption2_diagnostics(const Seq& seq, long N, long horizon) {
  if (N < 2) throw Error(ErrorCode::InvalidArgument, "N must be at least 2");
  if (horizon < N) throw Error(ErrorCode::InvalidArgument, "horizon must be at least N");
  Assumption2Report r;
  r.N = N;
  r.horizon = horizon;
  const int n = seq.order();
  double gap_sum = 0.0, omega_sum = 0.0;
  for (long k = 1; k <= horizon; ++k) {
    const auto a = seq.matrix(k);
    const Eigen::MatrixXd diff = Eigen::MatrixXd::Identity(n, n) - a.entries();
    gap_sum += diff.cwiseAbs().maxCoeff() / static_cast<double>(k);
    r.identity_gap_sums.push_back(gap_sum);
    r.chi = std::max(r.chi, a.entries().diagonal().cwiseInverse().sum());

    const auto phi = backward_product(seq, k, k + N - 1);
    const double w = (1.0 - phi.value.entries().diagonal().array()).maxCoeff();
    r.omega.push_back(w);
    omega_sum += w * std::log(static_cast<double>(k));
    r.omega_log_sums.push_back(omega_sum);
  }
  r.identity_gap_verdict = decade_trend(r.identity_gap_sums);
  r.omega_log_verdict = decade_trend(r.omega_log_sums);
  return r;
}

/// Log-spaced sample of a 1-indexed series (index k-1 holds the k-th value).
std::vector<Sample> sample_series(const std::vector<double>& values, int per_decade = 10);

nlohmann::json to_json(const ConvergenceBound& b);
nlohmann::json to_json(const AbsoluteProbabilityEstimate& e);
nlohmann::json to_json(const Prop1Report& r);
nlohmann::json to_json(const SeriesDiagnostics& d);
nlohmann::json to_json(const Assumption2Report& r);
nlohmann::json to_json(const BetaScheduleReport& r);

}  // namespace ipsm

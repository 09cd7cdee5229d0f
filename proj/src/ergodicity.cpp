#include "ipsm/ergodicity.hpp"

#include <cmath>

namespace ipsm {

double pi_uniform_gap(const AbsoluteProbabilityEstimate& est) {
  const double uniform = 1.0 / static_cast<double>(est.pi_hat.size());
  return (est.pi_hat.array() - uniform).abs().maxCoeff();
}

std::string to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::Summable: return "summable";
    case SeriesVerdict::Divergent: return "divergent";
    case SeriesVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

SeriesVerdict decade_trend(const std::vector<double>& partial_sums) {
  const long H = static_cast<long>(partial_sums.size());
  if (H < 100) return SeriesVerdict::Inconclusive;
  auto at = [&](long k) { return partial_sums[k - 1]; };
  const double last = at(H) - at(H / 10);
  const double prev = at(H / 10) - at(H / 100);
  if (last == 0.0) return SeriesVerdict::Summable;
  if (prev <= 0.0) return SeriesVerdict::Inconclusive;
  return last / prev < 0.7 ? SeriesVerdict::Summable : SeriesVerdict::Divergent;
}

SeriesDiagnostics series_diagnostics(const std::function<double(long)>& x, long horizon,
                                     const SeriesOptions& options) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  SeriesDiagnostics d;
  d.horizon = horizon;
  d.mu = options.mu;

  const bool want_corollary = static_cast<bool>(options.y);
  const long corollary_h = want_corollary ? std::min(options.corollary_horizon, horizon) : 0;
  const long needed = std::max(horizon, 2 * corollary_h);

  std::vector<double> xs(needed + 1, 0.0);
  for (long k = 1; k <= needed; ++k) {
    const double v = x(k);
    if (!(v > 0.0 && v < 1.0))
      throw Error(ErrorCode::DomainError, "x_" + std::to_string(k) + " = " + std::to_string(v) +
                                              " lies outside (0, 1)");
    xs[k] = v;
  }

  double prod = 1.0, sum = 0.0;
  for (long k = 1; k <= horizon; ++k) {
    prod *= 1.0 - xs[k];
    sum += prod;
    d.partial_products.push_back(prod);
    d.partial_sums.push_back(sum);
  }
  d.product_vanishes = d.partial_products.back() < options.vanish_threshold;
  d.part1 = decade_trend(d.partial_sums);

  // suffix sums of the partial products, truncated at the horizon
  std::vector<double> suffix(horizon + 2, 0.0);
  for (long k = horizon; k >= 1; --k) suffix[k] = suffix[k + 1] + d.partial_products[k - 1];
  for (long k = 10; k <= horizon; k *= 10)
    d.tail_probe.emplace_back(k, std::pow(static_cast<double>(k), options.mu) * suffix[k]);
  d.tail_probe_decreasing = d.tail_probe.size() >= 2;
  for (std::size_t i = 1; i < d.tail_probe.size(); ++i)
    if (!(d.tail_probe[i].second < d.tail_probe[i - 1].second)) d.tail_probe_decreasing = false;

  if (want_corollary) {
    std::vector<double> running;
    double total = 0.0;
    for (long j = 1; j <= corollary_h; ++j) {
      double inner = 0.0, p = 1.0;
      for (long r = 1; r <= corollary_h; ++r) {
        p *= 1.0 - xs[r + j];
        if (r >= j) inner += p;
      }
      total += inner * options.y(j);
      running.push_back(total);
    }
    d.corollary_partial = sample_series(running);
    d.corollary = decade_trend(running);
  }
  return d;
}

std::vector<Sample> sample_series(const std::vector<double>& values, int per_decade) {
  std::vector<Sample> out;
  const long n = static_cast<long>(values.size());
  long last = 0;
  for (int i = 0;; ++i) {
    long k = static_cast<long>(std::llround(std::pow(10.0, static_cast<double>(i) / per_decade)));
    if (k > n) break;
    if (k == last) continue;
    out.emplace_back(k, values[k - 1]);
    last = k;
  }
  if (n > 0 && last != n) out.emplace_back(n, values[n - 1]);
  return out;
}

namespace {

nlohmann::json samples_json(const std::vector<Sample>& samples) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [k, v] : samples) arr.push_back({k, v});
  return arr;
}

nlohmann::json vector_json(const Eigen::RowVectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

nlohmann::json to_json(const ConvergenceBound& b) {
  return {{"s", b.s}, {"k", b.k}, {"value", b.value}, {"tail_error", b.tail_error},
          {"terms_used", b.terms_used}};
}

nlohmann::json to_json(const AbsoluteProbabilityEstimate& e) {
  return {{"s", e.s}, {"pi_hat", vector_json(e.pi_hat)}, {"horizon", e.horizon},
          {"spread_at_K", e.spread_at_K}};
}

nlohmann::json to_json(const Prop1Report& r) {
  nlohmann::json j = {{"s", r.s},
                      {"k", r.k},
                      {"K", r.K},
                      {"deviation", r.deviation},
                      {"gamma", to_json(r.gamma)},
                      {"spread_at_K", r.spread_at_K},
                      {"dominated", r.dominated},
                      {"assumption_satisfied", r.assumption_satisfied}};
  j["first_violating_block"] =
      r.first_violating_block ? nlohmann::json(*r.first_violating_block) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const SeriesDiagnostics& d) {
  return {{"horizon", d.horizon},
          {"mu", d.mu},
          {"partial_products", samples_json(sample_series(d.partial_products))},
          {"partial_sums", samples_json(sample_series(d.partial_sums))},
          {"tail_probe", samples_json(d.tail_probe)},
          {"corollary_partial", samples_json(d.corollary_partial)},
          {"verdicts",
           {{"product_vanishes", d.product_vanishes},
            {"part1", to_string(d.part1)},
            {"tail_probe_decreasing", d.tail_probe_decreasing},
            {"corollary", to_string(d.corollary)}}}};
}

nlohmann::json to_json(const Assumption2Report& r) {
  return {{"N", r.N},
          {"horizon", r.horizon},
          {"identity_gap_sums", samples_json(sample_series(r.identity_gap_sums))},
          {"omega", samples_json(sample_series(r.omega))},
          {"omega_log_sums", samples_json(sample_series(r.omega_log_sums))},
          {"chi", r.chi},
          {"verdicts",
           {{"identity_gap", to_string(r.identity_gap_verdict)},
            {"omega_log", to_string(r.omega_log_verdict)},
            {"jointly_summable", r.jointly_summable()}}}};
}

nlohmann::json to_json(const BetaScheduleReport& r) {
  nlohmann::json j = {{"horizon", r.horizon},
                      {"B", r.B},
                      {"block_minima", r.block_minima},
                      {"block_schedule", r.block_schedule},
                      {"schedule_ok", r.schedule_ok()},
                      {"connectivity_ok", r.connectivity_ok}};
  j["first_violating_block"] =
      r.first_violating_block ? nlohmann::json(*r.first_violating_block) : nlohmann::json(nullptr);
  j["first_disconnected_index"] =
      r.first_disconnected_index ? nlohmann::json(*r.first_disconnected_index) : nlohmann::json(nullptr);
  return j;
}

}  // namespace ipsm

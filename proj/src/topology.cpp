#include "ipsm/topology.hpp"

#include <cmath>

#include "ipsm/matrix_io.hpp"

namespace ipsm {

std::string to_string(TopologyMode mode) {
  return mode == TopologyMode::Standard ? "standard" : "identity_approaching";
}

TopologyMode topology_mode_from_string(const std::string& name) {
  if (name == "standard") return TopologyMode::Standard;
  if (name == "identity_approaching") return TopologyMode::IdentityApproaching;
  throw Error(ErrorCode::ConfigError, "unknown topology mode '" + name + "'");
}

void TopologyConfig::validate() const {
  if (n < 2) throw Error(ErrorCode::ConfigError, "n must be at least 2");
  if (n > kMaxOrder) throw Error(ErrorCode::ConfigError, "n must not exceed 64");
  if (!(extra_edge_prob >= 0.0 && extra_edge_prob <= 1.0))
    throw Error(ErrorCode::ConfigError, "extra_edge_prob must lie in [0, 1]");
  if (!(epsilon_exponent > 1.0)) throw Error(ErrorCode::ConfigError, "epsilon_exponent must exceed 1");
  if (!(laziness >= 0.0 && laziness < 1.0)) throw Error(ErrorCode::ConfigError, "laziness must lie in [0, 1)");
  if (laziness > 0.0 && mode != TopologyMode::Standard)
    throw Error(ErrorCode::ConfigError, "laziness applies to standard mode only");
  if (assumption_params.n() != n)
    throw Error(ErrorCode::ConfigError, "assumption params built for a different n");
}

std::vector<Edge> cycle_skeleton(const std::vector<int>& order) {
  std::vector<Edge> edges;
  const std::size_t n = order.size();
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(order[i], order[(i + 1) % n]);
  return edges;
}

std::vector<Edge> random_strongly_connected_skeleton(int n, RandomStream& rng) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "skeleton needs n >= 2");
  return cycle_skeleton(rng.permutation(n));
}

double identity_mass(long t, double exponent) {
  return std::min(std::pow(static_cast<double>(t + 1), -exponent), 0.5);
}

MatrixSequence::MatrixSequence(TopologyConfig config) : config_(std::move(config)) { config_.validate(); }

StochasticMatrix MatrixSequence::matrix(long t) const {
  if (t < 0) throw Error(ErrorCode::GenerationFailure, "negative time index");
  const int n = config_.n;
  RandomStream rng(config_.seed, static_cast<std::uint64_t>(t), Stream::Topology);

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> support =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n);
  for (const auto& [i, j] : random_strongly_connected_skeleton(n, rng)) support(i, j) = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && !support(i, j) && rng.uniform() < config_.extra_edge_prob) support(i, j) = true;

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (support(i, j)) w(i, j) = rng.uniform_open_closed();

  if (config_.mode == TopologyMode::Standard) {
    if (config_.laziness == 0.0) return normalize_rows(w);
    Eigen::MatrixXd m = normalize_rows(w).entries() * (1.0 - config_.laziness);
    m.diagonal().array() += config_.laziness;
    return StochasticMatrix::from_matrix(std::move(m));
  }

  const double eps = identity_mass(t, config_.epsilon_exponent);
  w.diagonal().setZero();
  for (int i = 0; i < n; ++i) w.row(i) *= eps / w.row(i).sum();
  w.diagonal().setConstant(1.0 - eps);
  return StochasticMatrix::from_matrix(std::move(w));
}

double MatrixSequence::beta(long t) const {
  {
    std::lock_guard lock(beta_mutex_);
    if (t >= 0 && static_cast<std::size_t>(t) < beta_cache_.size() && beta_cache_[t] > 0.0)
      return beta_cache_[t];
  }
  const double b = min_positive_entry(matrix(t));
  std::lock_guard lock(beta_mutex_);
  if (beta_cache_.size() <= static_cast<std::size_t>(t)) beta_cache_.resize(t + 1, 0.0);
  beta_cache_[t] = b;
  return b;
}

std::vector<double> MatrixSequence::beta_trace(long horizon) const {
  std::vector<double> out;
  out.reserve(horizon);
  for (long t = 0; t < horizon; ++t) out.push_back(beta(t));
  return out;
}

void MatrixSequence::export_csv(const std::filesystem::path& dir, long first, long last) const {
  std::filesystem::create_directories(dir);
  for (long t = first; t <= last; ++t)
    write_matrix_csv(dir / ("A_" + std::to_string(t) + ".csv"), matrix(t).entries());
}

}  // namespace ipsm

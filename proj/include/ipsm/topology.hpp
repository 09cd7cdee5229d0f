#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ipsm/assumptions.hpp"
#include "ipsm/rng.hpp"
#include "ipsm/stochastic.hpp"

namespace ipsm {

enum class TopologyMode { Standard, IdentityApproaching };

std::string to_string(TopologyMode mode);
TopologyMode topology_mode_from_string(const std::string& name);

struct TopologyConfig {
  int n = 6;
  std::uint64_t seed = 0;
  double extra_edge_prob = 0.3;
  TopologyMode mode = TopologyMode::Standard;
  double epsilon_exponent = 1.5;
  double laziness = 0.0;  // standard mode: A(t) = laziness * I + (1 - laziness) * M(t)
  AssumptionParams assumption_params{6, 0.5, 0.5};

  void validate() const;
};

using Edge = std::pair<int, int>;

/// Hamiltonian cycle through the given ordering of the nodes.
std::vector<Edge> cycle_skeleton(const std::vector<int>& order);

/// Hamiltonian cycle on a uniformly random permutation; strongly connected.
std::vector<Edge> random_strongly_connected_skeleton(int n, RandomStream& rng);

/// Off-diagonal mass of A(t) in identity-approaching mode:
/// min((t + 1)^(-exponent), 1/2).
double identity_mass(long t, double exponent);

/// Seeded, index-addressed sequence {A(t)}.
///
/// A(t) depends only on (config, t): self-loops, a random Hamiltonian cycle,
/// and each remaining off-diagonal edge with probability extra_edge_prob,
/// weighted uniformly on (0, 1] and normalized by row. In identity-approaching
/// mode the off-diagonal part is renormalized to carry exactly identity_mass(t)
/// and the diagonal carries the rest. A positive laziness mixes the
/// standard-mode matrix with the identity, bounding every A_ii(t) below by it.
class MatrixSequence {
 public:
  explicit MatrixSequence(TopologyConfig config);

  MatrixSequence(const MatrixSequence& other) : config_(other.config_) {}
  MatrixSequence& operator=(const MatrixSequence&) = delete;

  const TopologyConfig& config() const { return config_; }
  int order() const { return config_.n; }

  StochasticMatrix matrix(long t) const;

  /// min_positive_entry(A(t)), memoized.
  double beta(long t) const;
  std::vector<double> beta_trace(long horizon) const;

  /// Writes A_<t>.csv for t in [first, last].
  void export_csv(const std::filesystem::path& dir, long first, long last) const;

 private:
  TopologyConfig config_;
  mutable std::mutex beta_mutex_;
  mutable std::vector<double> beta_cache_;
};

/// Single-threaded memo over a MatrixSequence for workloads that revisit a
/// sliding window of indices (optimizer runs, pi tracking).
class CachedSequence {
 public:
  explicit CachedSequence(const MatrixSequence& seq) : seq_(seq) {}

  int order() const { return seq_.order(); }
  const MatrixSequence& source() const { return seq_; }

  const StochasticMatrix& matrix(long t) const {
    auto it = cache_.find(t);
    if (it == cache_.end()) it = cache_.emplace(t, seq_.matrix(t)).first;
    return it->second;
  }

  void evict_before(long t) { cache_.erase(cache_.begin(), cache_.lower_bound(t)); }

 private:
  const MatrixSequence& seq_;
  mutable std::map<long, StochasticMatrix> cache_;
};

struct BetaScheduleReport {
  long horizon = 0;
  long B = 0;
  std::vector<double> block_minima;  // block s = 1, 2, ... at index s - 1
  std::vector<double> block_schedule;
  std::optional<long> first_violating_block;
  bool connectivity_ok = true;
  std::optional<long> first_disconnected_index;

  bool schedule_ok() const { return !first_violating_block.has_value(); }
};

/// Per-block minimum of the realized beta trace against the schedule
/// (delta / (s + 1)^lambda)^(1/B) over blocks (s-1)B <= t < sB, t < horizon.
template <MatrixSource Seq>
BetaScheduleReport beta_schedule_check(const Seq& seq, const AssumptionParams& params, long horizon) {
  const long B = params.B();
  if (horizon < B)
    throw Error(ErrorCode::InvalidArgument,
                "horizon " + std::to_string(horizon) + " is below B=" + std::to_string(B));
  BetaScheduleReport report;
  report.horizon = horizon;
  report.B = B;
  for (long block = 1; (block - 1) * B < horizon; ++block) {
    double lo = std::numeric_limits<double>::infinity();
    for (long t = (block - 1) * B; t < std::min(block * B, horizon); ++t) {
      const auto a = seq.matrix(t);
      lo = std::min(lo, min_positive_entry(a));
      if (report.connectivity_ok && !connectivity(a)) {
        report.connectivity_ok = false;
        report.first_disconnected_index = t;
      }
    }
    const double log_bound = params.log_schedule(block);
    report.block_minima.push_back(lo);
    report.block_schedule.push_back(std::exp(log_bound));
    if (!report.first_violating_block && std::log(lo) < log_bound) report.first_violating_block = block;
  }
  return report;
}

}  // namespace ipsm

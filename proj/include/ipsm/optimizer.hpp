#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ipsm/ergodicity.hpp"
#include "ipsm/objectives.hpp"
#include "ipsm/topology.hpp"

namespace ipsm {

/// Box [lower, upper] per coordinate.
class FeasibleBox {
 public:
  FeasibleBox(int dim, double lower = -1.0, double upper = 1.0);
  FeasibleBox(Eigen::VectorXd lower, Eigen::VectorXd upper);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  double diameter() const { return (upper_ - lower_).norm(); }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x) const {
    return (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
  }

 private:
  Eigen::VectorXd lower_, upper_;
};

/// Componentwise clamp; idempotent and nonexpansive.
Eigen::VectorXd project_box(const FeasibleBox& box, const Eigen::VectorXd& x);

enum class Method { UDPSG, UDSG, SDSG, SPSG };

std::string to_string(Method method);
Method method_from_string(const std::string& name);
bool is_projected(Method method);
bool is_stretched(Method method);

/// Agent states are stored one agent per row (n x d), mirroring X(k).
using AgentStates = Eigen::MatrixXd;

struct StepResult {
  AgentStates next;              // x_{i,k+1}
  AgentStates pre_projection;    // v_{i,k}
  AgentStates mixed;             // sum_j A_ij(k) x_{j,k}
  AgentStates projection_error;  // xi_{i,k} = x_{i,k+1} - v_{i,k}
  Eigen::VectorXd stretched_gradient_norms;  // ||g_{i,k}|| / A_ii(k) (unstretched methods divide by 1)
};

/// One synchronous update of every agent.
///   UDPSG: x+ = P[A x - alpha g / A_ii]    UDSG: without P
///   SPSG:  x+ = P[A x - alpha g]           SDSG: without P
/// Throws ZeroDiagonal when a stretched method meets A_ii <= zero_tol.
StepResult step(Method method, const AgentStates& states, const StochasticMatrix& a,
                const std::vector<Objective>& objectives, double alpha, const FeasibleBox& box,
                const std::function<void(Eigen::VectorXd&)>& noise = {});

/// y_{k+1} = y_k + sum_i pi_i(k+1) u_{i,k}, with u stacked by agent rows.
Eigen::RowVectorXd auxiliary_update(const Eigen::RowVectorXd& y, const Eigen::RowVectorXd& pi_next,
                                    const AgentStates& u);

/// (1/n) sum_i ||x_i - mean||.
double consensus_error(const AgentStates& states);

/// Estimates pi(t) along a sequence: anchors at multiples of B are estimated
/// from Phi(anchor, anchor + blocks * B) and intermediate indices follow
/// pi(t) = pi(t+1) A(t) backwards from the next anchor.
class PiTracker {
 public:
  PiTracker(const CachedSequence& seq, long blocks = 40);

  Eigen::RowVectorXd pi(long t);
  /// Row spread of the most recent anchor estimate.
  double last_spread() const { return last_spread_; }
  double max_spread() const { return max_spread_; }

 private:
  const CachedSequence& seq_;
  long B_;
  long blocks_;
  long block_start_ = -1;
  std::vector<Eigen::RowVectorXd> block_;  // pi(block_start_ + i)
  double last_spread_ = 0.0;
  double max_spread_ = 0.0;
};

struct OptimizerConfig {
  Method method = Method::UDPSG;
  long iterations = 20000;
  double step_scale = 1.0;  // alpha_k = step_scale / k, k >= 1
  std::uint64_t init_seed = 0;
  long pi_blocks = 40;
  long state_stride = 0;  // keep every stride-th agent snapshot; 0 keeps none
  std::function<void(Eigen::VectorXd&)> gradient_noise;

  void validate() const;
};

struct TrajectoryRecord {
  long k = 0;
  double consensus_error = 0.0;
  double f_mean = 0.0;          // f at the agent average
  double f_y = 0.0;             // f at the auxiliary point y_k
  double movement = 0.0;        // mean_i ||x_{i,k} - x_{i,k-1}||, 0 at k = 0
  double max_y_deviation = 0.0; // max_i ||x_{i,k} - y_k||
  double max_projection_ratio = 0.0;  // max_i ||xi_{i,k-1}|| / (alpha ||g|| / A_ii); <= 1
};

struct Trajectory {
  Method method = Method::UDPSG;
  std::uint64_t topology_seed = 0;
  std::uint64_t init_seed = 0;
  std::vector<TrajectoryRecord> records;  // k = 0 .. K
  std::vector<std::pair<long, AgentStates>> snapshots;
  AgentStates final_states;
  Eigen::RowVectorXd final_y;
  double pi_spread = 0.0;  // largest row spread among the pi estimates used for y
};

/// i.i.d. uniform initial states in the box from the InitialState stream.
AgentStates initial_states(int agents, const FeasibleBox& box, std::uint64_t seed);

Trajectory run(const OptimizerConfig& config, const MatrixSequence& seq, const std::vector<Objective>& objectives,
               const FeasibleBox& box);

/// CSV with header k,consensus_error,f_mean,f_y,method,seed.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// One JSON object per snapshot: {"k": .., "states": [[..], ..]}.
void write_states_jsonl(std::ostream& os, const Trajectory& traj);

}  // namespace ipsm

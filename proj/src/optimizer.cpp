#include "ipsm/optimizer.hpp"

#include <ostream>

#include "ipsm/matrix_io.hpp"
#include "ipsm/rng.hpp"

namespace ipsm {

FeasibleBox::FeasibleBox(int dim, double lower, double upper)
    : FeasibleBox(Eigen::VectorXd::Constant(dim, lower), Eigen::VectorXd::Constant(dim, upper)) {}

FeasibleBox::FeasibleBox(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() < 1)
    throw Error(ErrorCode::DimensionMismatch, "box bounds must share a positive dimension");
  if (!(lower_.array() < upper_.array()).all())
    throw Error(ErrorCode::InvalidArgument, "box needs lower < upper componentwise");
}

Eigen::VectorXd project_box(const FeasibleBox& box, const Eigen::VectorXd& x) {
  return x.cwiseMax(box.lower()).cwiseMin(box.upper());
}

std::string to_string(Method method) {
  switch (method) {
    case Method::UDPSG: return "UDPSG";
    case Method::UDSG: return "UDSG";
    case Method::SDSG: return "SDSG";
    case Method::SPSG: return "SPSG";
  }
  return "UDPSG";
}

Method method_from_string(const std::string& name) {
  for (Method m : {Method::UDPSG, Method::UDSG, Method::SDSG, Method::SPSG})
    if (to_string(m) == name) return m;
  throw Error(ErrorCode::ConfigError, "unknown method '" + name + "'");
}

bool is_projected(Method method) { return method == Method::UDPSG || method == Method::SPSG; }
bool is_stretched(Method method) { return method == Method::UDPSG || method == Method::UDSG; }

StepResult step(Method method, const AgentStates& states, const StochasticMatrix& a,
                const std::vector<Objective>& objectives, double alpha, const FeasibleBox& box,
                const std::function<void(Eigen::VectorXd&)>& noise) {
  const Eigen::Index n = states.rows();
  if (a.order() != n || static_cast<Eigen::Index>(objectives.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "agents, matrix order and objectives disagree");
  if (states.cols() != box.dim()) throw Error(ErrorCode::DimensionMismatch, "state and box dimensions differ");

  StepResult r;
  r.mixed.noalias() = a.entries() * states;
  r.pre_projection = r.mixed;
  r.stretched_gradient_norms.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double scale = 1.0;
    if (is_stretched(method)) {
      if (!a.positive(i, i)) throw Error(ErrorCode::ZeroDiagonal, "A_ii(k) vanishes for agent " + std::to_string(i));
      scale = 1.0 / a(i, i);
    }
    Eigen::VectorXd g = objectives[i].subgradient(states.row(i).transpose());
    if (noise) noise(g);
    r.stretched_gradient_norms(i) = g.norm() * scale;
    r.pre_projection.row(i) -= (alpha * scale) * g.transpose();
  }
  r.next = r.pre_projection;
  if (is_projected(method))
    for (Eigen::Index i = 0; i < n; ++i) r.next.row(i) = project_box(box, r.pre_projection.row(i).transpose());
  r.projection_error = r.next - r.pre_projection;
  return r;
}

Eigen::RowVectorXd auxiliary_update(const Eigen::RowVectorXd& y, const Eigen::RowVectorXd& pi_next,
                                    const AgentStates& u) {
  return y + pi_next * u;
}

double consensus_error(const AgentStates& states) {
  const Eigen::RowVectorXd shifted_mean = (states.rowwise() - states.row(0)).colwise().mean();
  return ((states.rowwise() - states.row(0)).rowwise() - shifted_mean).rowwise().norm().mean();
}

PiTracker::PiTracker(const CachedSequence& seq, long blocks)
    : seq_(seq), B_(communication_interval(seq.order())), blocks_(blocks) {
  if (blocks < 1) throw Error(ErrorCode::InvalidArgument, "pi horizon needs at least one block");
}

Eigen::RowVectorXd PiTracker::pi(long t) {
  if (t < 0) throw Error(ErrorCode::InvalidArgument, "negative time index");
  if (block_start_ < 0 || t < block_start_ || t >= block_start_ + static_cast<long>(block_.size())) {
    const long anchor = ((t + B_ - 1) / B_) * B_;
    const auto est = estimate_pi(seq_, anchor, anchor + blocks_ * B_);
    last_spread_ = est.spread_at_K;
    max_spread_ = std::max(max_spread_, est.spread_at_K);
    block_start_ = std::max(0L, anchor - B_ + 1);
    block_.assign(anchor - block_start_ + 1, Eigen::RowVectorXd());
    block_.back() = est.pi_hat;
    for (long u = anchor - 1; u >= block_start_; --u)
      block_[u - block_start_] = block_[u + 1 - block_start_] * seq_.matrix(u).entries();
  }
  return block_[t - block_start_];
}

void OptimizerConfig::validate() const {
  if (iterations < 0) throw Error(ErrorCode::ConfigError, "iterations must be nonnegative");
  if (!(step_scale > 0.0)) throw Error(ErrorCode::ConfigError, "step scale must be positive");
  if (pi_blocks < 1) throw Error(ErrorCode::ConfigError, "pi_blocks must be positive");
}

AgentStates initial_states(int agents, const FeasibleBox& box, std::uint64_t seed) {
  RandomStream rng(seed, 0, Stream::InitialState);
  AgentStates x(agents, box.dim());
  for (int i = 0; i < agents; ++i)
    for (int j = 0; j < box.dim(); ++j) x(i, j) = rng.uniform(box.lower()(j), box.upper()(j));
  return x;
}

namespace {

double aggregate_value(const std::vector<Objective>& objectives, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (const auto& f : objectives) v += f.value(x);
  return v;
}

}  // namespace

Trajectory run(const OptimizerConfig& config, const MatrixSequence& seq, const std::vector<Objective>& objectives,
               const FeasibleBox& box) {
  config.validate();
  const int n = seq.order();
  if (static_cast<int>(objectives.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "one objective per agent required");
  for (const auto& f : objectives)
    if (f.dim() != box.dim()) throw Error(ErrorCode::DimensionMismatch, "objective and box dimensions differ");

  CachedSequence cache(seq);
  PiTracker tracker(cache, config.pi_blocks);

  Trajectory traj;
  traj.method = config.method;
  traj.topology_seed = seq.config().seed;
  traj.init_seed = config.init_seed;

  AgentStates x = initial_states(n, box, config.init_seed);
  Eigen::RowVectorXd y = tracker.pi(0) * x;

  auto record = [&](long k, double movement, double ratio) {
    TrajectoryRecord rec;
    rec.k = k;
    rec.consensus_error = consensus_error(x);
    rec.f_mean = aggregate_value(objectives, x.colwise().mean().transpose());
    rec.f_y = aggregate_value(objectives, y.transpose());
    rec.movement = movement;
    rec.max_y_deviation = (x.rowwise() - y).rowwise().norm().maxCoeff();
    rec.max_projection_ratio = ratio;
    traj.records.push_back(rec);
    if (config.state_stride > 0 && k % config.state_stride == 0) traj.snapshots.emplace_back(k, x);
  };
  record(0, 0.0, 0.0);

  for (long k = 0; k < config.iterations; ++k) {
    const double alpha = config.step_scale / static_cast<double>(k + 1);
    const StochasticMatrix& a = cache.matrix(k);
    StepResult s = step(config.method, x, a, objectives, alpha, box, config.gradient_noise);

    if (is_projected(config.method))
      for (Eigen::Index i = 0; i < s.next.rows(); ++i)
        if (!box.contains(s.next.row(i).transpose()))
          throw Error(ErrorCode::AssumptionViolated, "projected iterate left the box");

    double ratio = 0.0;
    for (Eigen::Index i = 0; i < s.next.rows(); ++i) {
      const double budget = alpha * s.stretched_gradient_norms(i);
      const double err = s.projection_error.row(i).norm();
      if (err > 0.0) ratio = std::max(ratio, budget > 0.0 ? err / budget : std::numeric_limits<double>::infinity());
    }

    const AgentStates u = s.next - s.mixed;
    y = auxiliary_update(y, tracker.pi(k + 1), u);
    const double movement = (s.next - x).rowwise().norm().mean();
    x = std::move(s.next);
    cache.evict_before(k);
    record(k + 1, movement, ratio);
  }
  traj.final_states = x;
  traj.final_y = y;
  traj.pi_spread = tracker.max_spread();
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "k,consensus_error,f_mean,f_y,method,seed\n";
  const std::string method = to_string(traj.method);
  for (const auto& r : traj.records)
    os << r.k << ',' << format_real(r.consensus_error) << ',' << format_real(r.f_mean) << ','
       << format_real(r.f_y) << ',' << method << ',' << traj.topology_seed << '\n';
}

void write_states_jsonl(std::ostream& os, const Trajectory& traj) {
  for (const auto& [k, states] : traj.snapshots) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < states.cols(); ++j) row.push_back(states(i, j));
      rows.push_back(row);
    }
    os << nlohmann::json{{"k", k}, {"states", rows}}.dump() << '\n';
  }
}

}  // namespace ipsm

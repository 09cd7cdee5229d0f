#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ipsm/optimizer.hpp"

using namespace ipsm;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::vector<Objective> common_quadratic(int agents, double target) {
  return std::vector<Objective>(agents, Objective(Family::SquaredError, DataPoint{vec({1.0}), target}, 1));
}

std::vector<Objective> flat(int agents, int dim) {
  return std::vector<Objective>(agents, Objective(Family::SquaredError, DataPoint{Eigen::VectorXd::Zero(dim), 0.0}, dim));
}

TopologyConfig config(std::uint64_t seed, int n = 6) {
  TopologyConfig c;
  c.n = n;
  c.seed = seed;
  c.assumption_params = AssumptionParams(n, 0.5, 0.5);
  return c;
}

}  // namespace

TEST(ProjectBox, Examples) {
  const FeasibleBox box(2);
  EXPECT_EQ(project_box(box, vec({2, 0.5})), vec({1, 0.5}));
  EXPECT_EQ(project_box(box, vec({0.2, -0.9})), vec({0.2, -0.9}));
  EXPECT_EQ(project_box(box, vec({-3, -3})), vec({-1, -1}));
  EXPECT_DOUBLE_EQ(box.diameter(), std::sqrt(8.0));
  EXPECT_THROW(FeasibleBox(2, 1.0, -1.0), Error);
}

TEST(ProjectBox, NonexpansiveAndObtuseAngle) {
  const FeasibleBox box(3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> wide(-4, 4), inside(-1, 1);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector3d x(wide(rng), wide(rng), wide(rng)), z(wide(rng), wide(rng), wide(rng));
    const Eigen::Vector3d y(inside(rng), inside(rng), inside(rng));
    const Eigen::VectorXd px = project_box(box, x);
    ASSERT_LE((px - project_box(box, z)).norm(), (x - z).norm() + 1e-12);
    ASSERT_EQ(project_box(box, px), px);
    ASSERT_GE((x - y).squaredNorm() - (px - x).squaredNorm() - (px - y).squaredNorm(), -1e-9);
  }
}

TEST(Step, SingleAgentQuadratic) {
  const FeasibleBox box(1);
  const auto a = StochasticMatrix::identity(1);
  const AgentStates x0 = AgentStates::Zero(1, 1);
  const auto r = step(Method::UDPSG, x0, a, common_quadratic(1, 0.3), 1.0, box);
  EXPECT_NEAR(r.pre_projection(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(r.next(0, 0), 0.6, 1e-15);
  EXPECT_EQ(r.projection_error(0, 0), 0.0);
}

TEST(Step, ZeroGradientIsPureMixing) {
  const MatrixSequence seq(config(3));
  const FeasibleBox box(2);
  const AgentStates x = initial_states(6, box, 4);
  for (Method m : {Method::UDPSG, Method::UDSG, Method::SDSG, Method::SPSG}) {
    const auto r = step(m, x, seq.matrix(5), flat(6, 2), 0.7, box);
    EXPECT_TRUE(r.next.isApprox(seq.matrix(5).entries() * x, 1e-15));
  }
}

TEST(Step, InteriorProjectedAndUnprojectedAgree) {
  const MatrixSequence seq(config(2));
  const FeasibleBox box(2);
  const AgentStates x = 0.5 * initial_states(6, box, 1);
  const auto objs = make_objectives(make_dataset(Family::SquaredError, 6, 2, 0));
  const auto p = step(Method::UDPSG, x, seq.matrix(0), objs, 1e-3, box);
  const auto u = step(Method::UDSG, x, seq.matrix(0), objs, 1e-3, box);
  ASSERT_TRUE(p.projection_error.isZero());
  EXPECT_EQ(p.next, u.next);
  const auto sp = step(Method::SPSG, x, seq.matrix(0), objs, 1e-3, box);
  const auto sd = step(Method::SDSG, x, seq.matrix(0), objs, 1e-3, box);
  EXPECT_EQ(sp.next, sd.next);
}

TEST(Step, StretchDividesByDiagonal) {
  const MatrixSequence seq(config(5));
  const FeasibleBox box(2, -100, 100);
  const AgentStates x = initial_states(6, FeasibleBox(2), 2);
  const auto objs = make_objectives(make_dataset(Family::LogSin, 6, 2, 1));
  const auto a = seq.matrix(0);
  const auto r = step(Method::UDSG, x, a, objs, 0.1, box);
  for (int i = 0; i < 6; ++i) {
    const Eigen::VectorXd g = objs[i].subgradient(x.row(i).transpose());
    const Eigen::RowVectorXd expected = (a.entries().row(i) * x) - (0.1 / a(i, i)) * g.transpose();
    EXPECT_LT((r.next.row(i) - expected).norm(), 1e-14);
    EXPECT_NEAR(r.stretched_gradient_norms(i), g.norm() / a(i, i), 1e-14);
  }
}

TEST(Step, ZeroDiagonalRejectedForStretchedMethods) {
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 1, 0;
  const auto a = StochasticMatrix::from_matrix(m);
  const FeasibleBox box(1);
  const AgentStates x = AgentStates::Zero(2, 1);
  for (Method meth : {Method::UDPSG, Method::UDSG}) {
    try {
      step(meth, x, a, common_quadratic(2, 0.1), 0.5, box);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ZeroDiagonal);
    }
  }
  EXPECT_NO_THROW(step(Method::SPSG, x, a, common_quadratic(2, 0.1), 0.5, box));
}

TEST(AuxiliaryUpdate, Examples) {
  const Eigen::RowVectorXd y = vec({0.2, -0.1}).transpose();
  const Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(3, 1.0 / 3.0);
  EXPECT_EQ(auxiliary_update(y, pi, AgentStates::Zero(3, 2)), y);
  AgentStates u(3, 2);
  u.rowwise() = vec({0.05, 0.4}).transpose();
  EXPECT_TRUE(auxiliary_update(y, pi, u).isApprox(vec({0.25, 0.3}).transpose(), 1e-15));
}

TEST(ConsensusError, Examples) {
  AgentStates same(3, 2);
  same.rowwise() = vec({0.3, 0.4}).transpose();
  EXPECT_EQ(consensus_error(same), 0.0);
  AgentStates two(2, 1);
  two << 1, -1;
  EXPECT_DOUBLE_EQ(consensus_error(two), 1.0);
  AgentStates three(3, 1);
  three << 1, 0, -1;
  EXPECT_NEAR(consensus_error(three), 2.0 / 3.0, 1e-15);
}

TEST(Run, SingleAgentAuxiliaryIsTheState) {
  const ExplicitSequence one({StochasticMatrix::identity(1)});
  AgentStates x = AgentStates::Constant(1, 1, -0.2);
  Eigen::RowVectorXd y = x.row(0);
  const auto objs = common_quadratic(1, 0.9);
  for (long k = 0; k < 50; ++k) {
    const auto r = step(Method::UDPSG, x, one.matrix(k), objs, 1.0 / (k + 1), FeasibleBox(1));
    y = auxiliary_update(y, Eigen::RowVectorXd::Ones(1), r.next - r.mixed);
    x = r.next;
    ASSERT_NEAR(y(0), x(0, 0), 1e-15);
  }
}

TEST(Run, ZeroIterationsKeepsInitialRecord) {
  const MatrixSequence seq(config(0));
  OptimizerConfig cfg;
  cfg.iterations = 0;
  const auto objs = make_objectives(make_dataset(Family::SquaredError, 6, 2, 0));
  const auto t = run(cfg, seq, objs, FeasibleBox(2));
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].k, 0);
  EXPECT_EQ(t.final_states, initial_states(6, FeasibleBox(2), 0));
}

TEST(Run, AuxiliaryMatchesPiWeightedStates) {
  const MatrixSequence seq(config(0, 2));
  OptimizerConfig cfg;
  cfg.iterations = 300;
  const auto objs = common_quadratic(2, -0.4);
  const auto t = run(cfg, seq, objs, FeasibleBox(1));
  ASSERT_EQ(t.records.size(), 301u);
  CachedSequence cache(seq);
  PiTracker tracker(cache);
  const double expected = (tracker.pi(300) * t.final_states)(0);
  EXPECT_NEAR(t.final_y(0), expected, 1e-9);
}

TEST(Run, CommonQuadraticReachesMinimizer) {
  const MatrixSequence seq(config(1));
  OptimizerConfig cfg;
  cfg.iterations = 2000;
  const auto t = run(cfg, seq, common_quadratic(6, 0.3), FeasibleBox(1));
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(t.final_states(i, 0), 0.3, 1e-2);
}

TEST(Run, CommonQuadraticPlDecrease) {
  const MatrixSequence seq(config(1));
  OptimizerConfig cfg;
  cfg.iterations = 20000;
  const auto objs = common_quadratic(6, 0.3);
  const auto t = run(cfg, seq, objs, FeasibleBox(1));
  for (int i = 0; i < 6; ++i) EXPECT_LT(objs[i].value(t.final_states.row(i).transpose()), 1e-4);
}

TEST(Run, FeasibilityAndProjectionErrorBound) {
  const MatrixSequence seq(config(4));
  const auto objs = make_objectives(make_dataset(Family::AbsoluteError, 6, 2, 2));
  for (Method m : {Method::UDPSG, Method::SPSG}) {
    OptimizerConfig cfg;
    cfg.method = m;
    cfg.iterations = 3000;
    cfg.state_stride = 1;
    const auto t = run(cfg, seq, objs, FeasibleBox(2));
    for (const auto& r : t.records) ASSERT_LE(r.max_projection_ratio, 1.0 + 1e-12);
    for (const auto& [k, x] : t.snapshots) ASSERT_LE(x.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Run, AgentsApproachAuxiliarySequence) {
  const MatrixSequence seq(config(0));
  OptimizerConfig cfg;
  const long K = cfg.iterations;
  const auto objs = make_objectives(make_dataset(Family::SquaredError, 6, 2, 0));
  const auto t = run(cfg, seq, objs, FeasibleBox(2));
  double first = 0.0, last = 0.0;
  const long window = K / 10;
  for (long k = 1; k <= window; ++k) first += t.records[k].max_y_deviation / window;
  for (long k = K - window + 1; k <= K; ++k) last += t.records[k].max_y_deviation / window;
  EXPECT_LE(last * 10.0, first);
}

TEST(Run, DeterministicAndSharesInitialStates) {
  const MatrixSequence seq(config(6));
  const auto objs = make_objectives(make_dataset(Family::LogSin, 6, 2, 3));
  OptimizerConfig cfg;
  cfg.iterations = 500;
  cfg.init_seed = 9;
  const auto a = run(cfg, seq, objs, FeasibleBox(2));
  const auto b = run(cfg, seq, objs, FeasibleBox(2));
  EXPECT_EQ(a.final_states, b.final_states);
  EXPECT_EQ(a.final_y, b.final_y);
  cfg.method = Method::SPSG;
  const auto c = run(cfg, seq, objs, FeasibleBox(2));
  EXPECT_EQ(c.records[0].f_mean, a.records[0].f_mean);
  EXPECT_NE(c.final_states, a.final_states);
}

TEST(Run, NoiseHookIsApplied) {
  const MatrixSequence seq(config(0));
  OptimizerConfig cfg;
  cfg.iterations = 5;
  long calls = 0;
  cfg.gradient_noise = [&calls](Eigen::VectorXd&) { ++calls; };
  run(cfg, seq, flat(6, 2), FeasibleBox(2));
  EXPECT_EQ(calls, 30);
}

TEST(Run, TrajectoryCsvLayout) {
  const MatrixSequence seq(config(0));
  OptimizerConfig cfg;
  cfg.iterations = 3;
  const auto t = run(cfg, seq, flat(6, 2), FeasibleBox(2));
  std::ostringstream os;
  write_trajectory_csv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "k,consensus_error,f_mean,f_y,method,seed");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(StepSchedule, NotSummableButSquareSummable) {
  std::vector<double> s1, s2;
  double a = 0.0, b = 0.0;
  for (long k = 1; k <= 100000; ++k) {
    a += 1.0 / k;
    b += 1.0 / (static_cast<double>(k) * k);
    s1.push_back(a);
    s2.push_back(b);
  }
  EXPECT_EQ(decade_trend(s1), SeriesVerdict::Divergent);
  EXPECT_EQ(decade_trend(s2), SeriesVerdict::Summable);
}

TEST(Methods, Names) {
  for (Method m : {Method::UDPSG, Method::UDSG, Method::SDSG, Method::SPSG})
    EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_THROW(method_from_string("ADMM"), Error);
  EXPECT_TRUE(is_projected(Method::SPSG));
  EXPECT_FALSE(is_projected(Method::UDSG));
  EXPECT_TRUE(is_stretched(Method::UDSG));
  EXPECT_FALSE(is_stretched(Method::SDSG));
}

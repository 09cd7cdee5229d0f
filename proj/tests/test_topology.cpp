#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "ipsm/matrix_io.hpp"
#include "ipsm/topology.hpp"
#include "oracles.hpp"

using namespace ipsm;

namespace {

TopologyConfig config(int n, std::uint64_t seed, TopologyMode mode = TopologyMode::Standard) {
  TopologyConfig c;
  c.n = n;
  c.seed = seed;
  c.mode = mode;
  c.assumption_params = AssumptionParams(n, 0.5, 0.5);
  return c;
}

}  // namespace

TEST(Topology, RegenerationIsBitIdentical) {
  const MatrixSequence seq(config(6, 7));
  EXPECT_EQ(seq.matrix(3).entries(), seq.matrix(3).entries());
  const MatrixSequence again(config(6, 7));
  for (long t : {0L, 1L, 17L, 1000L, 123456L}) EXPECT_EQ(seq.matrix(t).entries(), again.matrix(t).entries());
  const MatrixSequence other(config(6, 8));
  EXPECT_NE(seq.matrix(3).entries(), other.matrix(3).entries());
}

TEST(Topology, TwoNodesForceTheTwoCycle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = MatrixSequence(config(2, seed)).matrix(seed);
    EXPECT_GT(a(0, 1), 0.0);
    EXPECT_GT(a(1, 0), 0.0);
  }
}

TEST(Topology, CycleSkeleton) {
  const auto edges = cycle_skeleton({1, 2, 0});
  ASSERT_EQ(edges.size(), 3u);
  EXPECT_EQ(edges[0], Edge(1, 2));
  EXPECT_EQ(edges[1], Edge(2, 0));
  EXPECT_EQ(edges[2], Edge(0, 1));

  RandomStream rng(5, 0, Stream::Sampling);
  for (int n = 2; n <= 9; ++n) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [i, j] : random_strongly_connected_skeleton(n, rng)) m(i, j) = 1.0;
    for (int i = 0; i < n; ++i) m.row(i) /= m.row(i).sum();
    EXPECT_TRUE(oracle::connectivity(m));
  }
}

TEST(Topology, GeneratedMatricesSatisfyStructuralAssumptions) {
  for (int n = 2; n <= 8; ++n)
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const MatrixSequence seq(config(n, seed));
      for (long t = 0; t < 40; ++t) {
        const auto a = seq.matrix(t);
        ASSERT_LT(a.row_sum_error(), 1e-12);
        ASSERT_TRUE(a.has_positive_diagonal());
        ASSERT_TRUE(oracle::connectivity(a.entries()));
        ASSERT_TRUE(is_sarymsakov(a));
      }
    }
}

TEST(Topology, IdentityMassFormula) {
  EXPECT_DOUBLE_EQ(identity_mass(0, 1.5), 0.5);
  EXPECT_DOUBLE_EQ(identity_mass(3, 1.5), 0.125);
  EXPECT_DOUBLE_EQ(identity_mass(99, 2.0), 1e-4);
}

TEST(Topology, IdentityApproachingOffDiagonalMass) {
  const MatrixSequence seq(config(6, 3, TopologyMode::IdentityApproaching));
  for (long t : {0L, 1L, 3L, 10L, 500L}) {
    const auto a = seq.matrix(t);
    const double eps = identity_mass(t, 1.5);
    for (int i = 0; i < 6; ++i) {
      EXPECT_NEAR(1.0 - a(i, i), eps, 1e-15);
      EXPECT_NEAR(a.entries().row(i).sum() - a(i, i), eps, 1e-15);
    }
    const Eigen::MatrixXd gap = Eigen::MatrixXd::Identity(6, 6) - a.entries();
    if (t >= 1) EXPECT_LE(gap.cwiseAbs().maxCoeff(), eps + 1e-15);
    EXPECT_TRUE(oracle::connectivity(a.entries()));
  }
}

TEST(Topology, LazinessBoundsTheDiagonal) {
  auto c = config(6, 4);
  c.laziness = 0.5;
  const MatrixSequence lazy(c);
  const MatrixSequence plain(config(6, 4));
  for (long t = 0; t < 50; ++t) {
    const Eigen::MatrixXd expected = 0.5 * Eigen::MatrixXd::Identity(6, 6) + 0.5 * plain.matrix(t).entries();
    EXPECT_TRUE(lazy.matrix(t).entries().isApprox(expected, 1e-15));
    EXPECT_GE(lazy.matrix(t).entries().diagonal().minCoeff(), 0.5);
  }
  c.mode = TopologyMode::IdentityApproaching;
  EXPECT_THROW(MatrixSequence{c}, Error);
}

TEST(Topology, ConfigValidation) {
  auto c = config(6, 0);
  c.extra_edge_prob = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c = config(6, 0);
  c.epsilon_exponent = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = config(6, 0);
  c.n = 1;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(topology_mode_from_string("identity_approaching"), TopologyMode::IdentityApproaching);
  EXPECT_THROW(topology_mode_from_string("lazy"), Error);
}

TEST(Topology, BetaTraceIsMemoizedMinimum) {
  const MatrixSequence seq(config(6, 2));
  const auto trace = seq.beta_trace(30);
  ASSERT_EQ(trace.size(), 30u);
  for (long t = 0; t < 30; ++t) EXPECT_EQ(trace[t], min_positive_entry(seq.matrix(t)));
  EXPECT_EQ(seq.beta(7), trace[7]);
}

TEST(BetaSchedule, NegligibleDeltaNeverViolated) {
  const double log10_delta = -64.0 * 6 * std::log2(6.0);
  const auto params = AssumptionParams::from_log10_delta(6, log10_delta, 0.5);
  EXPECT_NEAR(params.log_delta(), log10_delta * std::log(10.0), 1e-9);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto report = beta_schedule_check(MatrixSequence(config(6, seed)), params, 1000);
    EXPECT_TRUE(report.schedule_ok());
    EXPECT_TRUE(report.connectivity_ok);
    EXPECT_EQ(report.B, 15);
  }
}

TEST(BetaSchedule, LargeDeltaViolatesAtFirstBlock) {
  const auto report = beta_schedule_check(MatrixSequence(config(6, 0)), AssumptionParams(6, 0.9, 0.5), 300);
  ASSERT_TRUE(report.first_violating_block);
  EXPECT_EQ(*report.first_violating_block, 1);
  EXPECT_NEAR(report.block_schedule[0], std::pow(0.9 / std::sqrt(2.0), 1.0 / 15), 1e-12);
}

TEST(BetaSchedule, IdentityTraceFlagsConnectivity) {
  const ExplicitSequence identity({StochasticMatrix::identity(6)});
  const auto report = beta_schedule_check(identity, AssumptionParams(6, 0.5, 0.5), 45);
  EXPECT_FALSE(report.connectivity_ok);
  ASSERT_TRUE(report.first_disconnected_index);
  EXPECT_EQ(*report.first_disconnected_index, 0);
  EXPECT_TRUE(report.schedule_ok());
  EXPECT_EQ(report.block_minima.size(), 3u);
}

TEST(BetaSchedule, HorizonBelowBRejected) {
  EXPECT_THROW(beta_schedule_check(MatrixSequence(config(6, 0)), AssumptionParams(6, 0.5, 0.5), 14), Error);
}

TEST(Topology, ExportWritesReadableCsv) {
  const auto dir = std::filesystem::temp_directory_path() / "ipsm_export_test";
  std::filesystem::remove_all(dir);
  const MatrixSequence seq(config(4, 1));
  seq.export_csv(dir, 2, 4);
  for (long t = 2; t <= 4; ++t)
    EXPECT_EQ(read_matrix(dir / ("A_" + std::to_string(t) + ".csv")), seq.matrix(t).entries());
  std::filesystem::remove_all(dir);
}

TEST(Assumptions, CommunicationInterval) {
  EXPECT_EQ(communication_interval(2), 1);
  EXPECT_EQ(communication_interval(6), 15);
  EXPECT_EQ(communication_interval(8), 21);
  EXPECT_EQ(communication_interval(9), 32);
  EXPECT_THROW(AssumptionParams(6, 0.0, 0.5), Error);
  EXPECT_THROW(AssumptionParams(6, 0.5, 1.0), Error);
}

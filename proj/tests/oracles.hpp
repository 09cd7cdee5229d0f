#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They work on raw Eigen matrices with plain loops and share no code
// with the library classifiers.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

inline bool pos(double v, double tol) { return v > tol; }

/// F(S) as a list of flags, by scanning rows of S.
inline std::vector<bool> consequent(const Eigen::MatrixXd& a, const std::vector<bool>& s, double tol) {
  const int n = static_cast<int>(a.rows());
  std::vector<bool> out(n, false);
  for (int i = 0; i < n; ++i)
    if (s[i])
      for (int j = 0; j < n; ++j)
        if (pos(a(i, j), tol)) out[j] = true;
  return out;
}

/// Every assignment of nodes to {neither, S, S'} with both sets nonempty.
inline bool sarymsakov(const Eigen::MatrixXd& a, double tol = 1e-15) {
  const int n = static_cast<int>(a.rows());
  long total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (long code = 0; code < total; ++code) {
    std::vector<bool> s(n, false), t(n, false);
    long c = code;
    int ns = 0, nt = 0;
    for (int i = 0; i < n; ++i) {
      const int d = static_cast<int>(c % 3);
      c /= 3;
      if (d == 1) s[i] = true, ++ns;
      if (d == 2) t[i] = true, ++nt;
    }
    if (ns == 0 || nt == 0) continue;
    const auto fs = consequent(a, s, tol);
    const auto ft = consequent(a, t, tol);
    bool meet = false;
    int uni = 0;
    for (int j = 0; j < n; ++j) {
      if (fs[j] && ft[j]) meet = true;
      if (fs[j] || ft[j]) ++uni;
    }
    if (!meet && uni <= ns + nt) return false;
  }
  return true;
}

/// Every proper nonempty S has an edge leaving it.
inline bool connectivity(const Eigen::MatrixXd& a, double tol = 1e-15) {
  const int n = static_cast<int>(a.rows());
  for (long mask = 1; mask + 1 < (1L << n); ++mask) {
    bool found = false;
    for (int i = 0; i < n && !found; ++i)
      for (int j = 0; j < n && !found; ++j)
        if (((mask >> i) & 1) && !((mask >> j) & 1) && pos(a(i, j), tol)) found = true;
    if (!found) return false;
  }
  return true;
}

inline bool scrambling(const Eigen::MatrixXd& a, double tol = 1e-15) {
  const int n = static_cast<int>(a.rows());
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) {
      bool shared = false;
      for (int j = 0; j < n; ++j)
        if (pos(a(i, j), tol) && pos(a(k, j), tol)) shared = true;
      if (!shared) return false;
    }
  return true;
}

inline bool has_positive_column(const Eigen::MatrixXd& a, double tol = 1e-15) {
  for (int j = 0; j < a.cols(); ++j) {
    bool all = true;
    for (int i = 0; i < a.rows(); ++i) all = all && pos(a(i, j), tol);
    if (all) return true;
  }
  return false;
}

inline Eigen::MatrixXd multiply(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      long double acc = 0;
      for (int k = 0; k < a.cols(); ++k) acc += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = static_cast<double>(acc);
    }
  return c;
}

/// Random row-stochastic matrix with a random zero pattern; the diagonal is
/// kept positive when `diag` is set.
inline Eigen::MatrixXd random_pattern(int n, std::mt19937_64& rng, bool diag) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double density = 0.15 + 0.7 * u(rng);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if ((diag && i == j) || u(rng) < density) m(i, j) = 0.05 + u(rng);
    if (m.row(i).sum() == 0.0) m(i, static_cast<int>(u(rng) * n) % n) = 1.0;
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

/// Gamma(s, k) by direct long double summation until the products are
/// negligible, plus an integral bound for what is left.
inline long double gamma_sum(double delta, double lambda, long B, long s, long k) {
  if (s > k) s = k;
  const long m = (k - s) / B;
  const long c = s / B;
  long double p = 1, head = 0, sum = 0;
  for (long t = 0; t < 50'000'000; ++t) {
    p *= 1.0L - static_cast<long double>(delta) / std::pow(static_cast<long double>(c + t + 1), lambda);
    if (t == m) head = p;
    if (t >= m) sum += p;
    if (t > m && p < 1e-22L) break;
  }
  return head + sum;
}

/// Stationary row of a constant primitive chain by power iteration.
inline Eigen::RowVectorXd stationary(const Eigen::MatrixXd& a, int iterations = 10000) {
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Constant(a.rows(), 1.0 / static_cast<double>(a.rows()));
  for (int it = 0; it < iterations; ++it) v = v * a;
  return v / v.sum();
}

/// Smallest eigenvalue of a symmetric 2x2 matrix in closed form.
inline double min_eig2(const Eigen::Matrix2d& g) {
  const double tr = g(0, 0) + g(1, 1);
  const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  return 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
}

}  // namespace oracle

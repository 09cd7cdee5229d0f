#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ipsm/error.hpp"

namespace ipsm {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr double kDefaultZeroTol = 1e-15;
inline constexpr int kDefaultEnumerationLimit = 14;
inline constexpr int kMaxOrder = 64;

/// Subset of {0, ..., n-1} stored as a bitmask (dense desk scale, n <= 64).
/// Indices are zero-based throughout the library.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(std::uint64_t mask) : mask_(mask) {}
  IndexSet(std::initializer_list<int> members) {
    for (int m : members) insert(m);
  }

  static IndexSet full(int n) {
    return IndexSet(n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
  }

  void insert(int i) { mask_ |= std::uint64_t{1} << i; }
  bool contains(int i) const { return (mask_ >> i) & 1u; }
  bool empty() const { return mask_ == 0; }
  int size() const { return std::popcount(mask_); }
  std::uint64_t mask() const { return mask_; }

  std::vector<int> members() const {
    std::vector<int> out;
    for (std::uint64_t m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }

  friend bool operator==(IndexSet a, IndexSet b) { return a.mask_ == b.mask_; }

 private:
  std::uint64_t mask_ = 0;
};

/// Square nonnegative row-stochastic matrix with a structural-zero threshold.
///
/// Entries at or below `zero_tol` are treated as structural zeros by every
/// classifier. Products inherit the larger threshold of their factors.
template <typename Scalar>
class BasicStochasticMatrix {
 public:
  using Matrix = MatrixX<Scalar>;

  BasicStochasticMatrix() = default;

  /// Validates an already stochastic matrix. Throws NonSquare, NegativeEntry
  /// or InvalidArgument (row sum off by more than `row_tol`).
  static BasicStochasticMatrix from_matrix(Matrix entries, Scalar zero_tol = Scalar(kDefaultZeroTol),
                                           Scalar row_tol = Scalar(1e-12)) {
    check_shape(entries);
    for (Eigen::Index i = 0; i < entries.rows(); ++i) {
      for (Eigen::Index j = 0; j < entries.cols(); ++j) {
        if (!(entries(i, j) >= Scalar(0)))
          throw Error(ErrorCode::NegativeEntry, "entry (" + std::to_string(i) + "," +
                                                    std::to_string(j) + ") is negative or NaN");
      }
      const Scalar sum = entries.row(i).sum();
      if (std::abs(sum - Scalar(1)) > row_tol)
        throw Error(ErrorCode::InvalidArgument,
                    "row " + std::to_string(i) + " sums to " + std::to_string(double(sum)));
    }
    return BasicStochasticMatrix(std::move(entries), zero_tol);
  }

  static BasicStochasticMatrix identity(int n, Scalar zero_tol = Scalar(kDefaultZeroTol)) {
    return BasicStochasticMatrix(Matrix::Identity(n, n), zero_tol);
  }

  /// Unchecked construction for callers that guarantee stochasticity
  /// (products, convex combinations of stochastic matrices).
  static BasicStochasticMatrix trusted(Matrix entries, Scalar zero_tol) {
    return BasicStochasticMatrix(std::move(entries), zero_tol);
  }

  int order() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  Scalar zero_tol() const { return zero_tol_; }
  Scalar operator()(int i, int j) const { return entries_(i, j); }
  bool positive(int i, int j) const { return entries_(i, j) > zero_tol_; }

  /// Largest deviation of a row sum from one.
  Scalar row_sum_error() const {
    return (entries_.rowwise().sum().array() - Scalar(1)).abs().maxCoeff();
  }

  bool validate(Scalar row_tol) const {
    return (entries_.array() >= Scalar(0)).all() && row_sum_error() <= row_tol;
  }

  /// Bitmask of the positive columns of row i.
  std::uint64_t row_support(int i) const {
    std::uint64_t m = 0;
    for (int j = 0; j < order(); ++j)
      if (positive(i, j)) m |= std::uint64_t{1} << j;
    return m;
  }

  bool has_positive_diagonal() const {
    for (int i = 0; i < order(); ++i)
      if (!positive(i, i)) return false;
    return true;
  }

 private:
  BasicStochasticMatrix(Matrix entries, Scalar zero_tol)
      : entries_(std::move(entries)), zero_tol_(zero_tol) {}

  static void check_shape(const Matrix& m) {
    if (m.rows() != m.cols())
      throw Error(ErrorCode::NonSquare, std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    if (m.rows() < 1) throw Error(ErrorCode::InvalidArgument, "order must be at least 1");
    if (m.rows() > kMaxOrder)
      throw Error(ErrorCode::TooLarge, "order " + std::to_string(m.rows()) + " exceeds 64");
  }

  Matrix entries_;
  Scalar zero_tol_ = Scalar(kDefaultZeroTol);
};

using StochasticMatrix = BasicStochasticMatrix<double>;

/// Divides every row by its sum. The zero pattern is preserved.
template <typename Derived>
BasicStochasticMatrix<typename Derived::Scalar> normalize_rows(
    const Eigen::MatrixBase<Derived>& raw,
    typename Derived::Scalar zero_tol = typename Derived::Scalar(kDefaultZeroTol)) {
  using Scalar = typename Derived::Scalar;
  if (raw.rows() != raw.cols())
    throw Error(ErrorCode::NonSquare,
                std::to_string(raw.rows()) + "x" + std::to_string(raw.cols()));
  MatrixX<Scalar> out = raw;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      if (!(out(i, j) >= Scalar(0)))
        throw Error(ErrorCode::NegativeEntry,
                    "entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
    const Scalar sum = out.row(i).sum();
    if (!(sum > Scalar(0))) throw Error(ErrorCode::ZeroRow, "row " + std::to_string(i));
    out.row(i) /= sum;
  }
  return BasicStochasticMatrix<Scalar>::from_matrix(std::move(out), zero_tol);
}

/// F_A(S): columns reachable in one step from the rows in S.
template <typename Scalar>
IndexSet consequent_set(const BasicStochasticMatrix<Scalar>& a, IndexSet s) {
  if (s.empty()) throw Error(ErrorCode::EmptySet, "consequent of the empty set");
  if ((s.mask() & ~IndexSet::full(a.order()).mask()) != 0)
    throw Error(ErrorCode::InvalidArgument, "index set exceeds matrix order");
  std::uint64_t out = 0;
  for (int i : s.members()) out |= a.row_support(i);
  return IndexSet(out);
}

namespace detail {

inline void check_enumerable(int n, int limit) {
  if (n > limit)
    throw Error(ErrorCode::TooLarge, "order " + std::to_string(n) +
                                         " exceeds enumeration limit " + std::to_string(limit));
}

// consequent[mask] for every subset mask of {0..n-1}.
template <typename Scalar>
std::vector<std::uint64_t> consequent_table(const BasicStochasticMatrix<Scalar>& a) {
  const int n = a.order();
  std::vector<std::uint64_t> rows(n);
  for (int i = 0; i < n; ++i) rows[i] = a.row_support(i);
  std::vector<std::uint64_t> table(std::size_t{1} << n, 0);
  for (std::uint64_t m = 1; m < table.size(); ++m)
    table[m] = table[m & (m - 1)] | rows[std::countr_zero(m)];
  return table;
}

}  // namespace detail

/// Sarymsakov test: for every pair of disjoint nonempty S, S', the consequent
/// sets intersect or their union is strictly larger than |S| + |S'|.
/// Exhaustive over unordered disjoint pairs (3^n growth).
template <typename Scalar>
bool is_sarymsakov(const BasicStochasticMatrix<Scalar>& a, int limit = kDefaultEnumerationLimit) {
  const int n = a.order();
  detail::check_enumerable(n, limit);
  const auto table = detail::consequent_table(a);
  const std::uint64_t all = IndexSet::full(n).mask();
  for (std::uint64_t s = 1; s <= all; ++s) {
    const std::uint64_t rest = all & ~s;
    const std::uint64_t fs = table[s];
    const int size_s = std::popcount(s);
    // submasks of the complement, each unordered pair visited once (t > s)
    for (std::uint64_t t = rest; t != 0; t = (t - 1) & rest) {
      if (t < s) continue;
      const std::uint64_t ft = table[t];
      if ((fs & ft) != 0) continue;
      if (std::popcount(fs | ft) > size_s + std::popcount(t)) continue;
      return false;
    }
  }
  return true;
}

/// Every proper nonempty S has an edge (i, j) with i in S and j outside S.
/// n = 1 holds vacuously.
template <typename Scalar>
bool satisfies_connectivity_condition(const BasicStochasticMatrix<Scalar>& a,
                                      int limit = kDefaultEnumerationLimit) {
  const int n = a.order();
  detail::check_enumerable(n, limit);
  const auto table = detail::consequent_table(a);
  const std::uint64_t all = IndexSet::full(n).mask();
  for (std::uint64_t s = 1; s < all; ++s)
    if ((table[s] & ~s) == 0) return false;
  return true;
}

/// Strong connectivity of the support digraph (edge i -> j when A_ij > tol),
/// equivalent to the connectivity condition and usable at any order.
template <typename Scalar>
bool is_strongly_connected_support(const BasicStochasticMatrix<Scalar>& a) {
  const int n = a.order();
  std::vector<std::uint64_t> out(n), in(n, 0);
  for (int i = 0; i < n; ++i) {
    out[i] = a.row_support(i);
    for (int j = 0; j < n; ++j)
      if (a.positive(i, j)) in[j] |= std::uint64_t{1} << i;
  }
  auto reach_all = [n](const std::vector<std::uint64_t>& adj) {
    std::uint64_t seen = 1, frontier = 1;
    while (frontier != 0) {
      std::uint64_t next = 0;
      for (std::uint64_t f = frontier; f != 0; f &= f - 1) next |= adj[std::countr_zero(f)];
      frontier = next & ~seen;
      seen |= next;
    }
    return seen == IndexSet::full(n).mask();
  };
  return reach_all(out) && reach_all(in);
}

/// Enumeration where feasible, digraph reachability beyond the limit.
template <typename Scalar>
bool connectivity(const BasicStochasticMatrix<Scalar>& a, int limit = kDefaultEnumerationLimit) {
  return a.order() <= limit ? satisfies_connectivity_condition(a, limit)
                            : is_strongly_connected_support(a);
}

template <typename Scalar>
bool is_scrambling(const BasicStochasticMatrix<Scalar>& a) {
  const int n = a.order();
  std::vector<std::uint64_t> rows(n);
  for (int i = 0; i < n; ++i) rows[i] = a.row_support(i);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((rows[i] & rows[j]) == 0) return false;
  return true;
}

template <typename Scalar>
struct PositiveColumn {
  int column;
  Scalar minimum;
};

/// Smallest column index whose entries all exceed zero_tol.
template <typename Scalar>
std::optional<PositiveColumn<Scalar>> positive_column_index(const BasicStochasticMatrix<Scalar>& a) {
  for (int j = 0; j < a.order(); ++j) {
    const Scalar lo = a.entries().col(j).minCoeff();
    if (lo > a.zero_tol()) return PositiveColumn<Scalar>{j, lo};
  }
  return std::nullopt;
}

/// Empirical beta of a realized matrix: smallest structurally positive entry.
template <typename Scalar>
Scalar min_positive_entry(const BasicStochasticMatrix<Scalar>& a) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  const auto& m = a.entries();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) > a.zero_tol() && m(i, j) < best) best = m(i, j);
  if (best == std::numeric_limits<Scalar>::infinity())
    throw Error(ErrorCode::AllZero, "no entry exceeds zero_tol");
  return best;
}

/// max_j (max_i A_ij - min_i A_ij); zero iff all rows coincide.
template <typename Derived>
typename Derived::Scalar row_spread(const Eigen::MatrixBase<Derived>& m) {
  return (m.colwise().maxCoeff() - m.colwise().minCoeff()).maxCoeff();
}

template <typename Scalar>
Scalar row_spread(const BasicStochasticMatrix<Scalar>& a) {
  return row_spread(a.entries());
}

/// Phi(s, k) = A(k) ... A(s+1) A(s). `end == start - 1` is the identity.
template <typename Scalar>
struct BasicBackwardProduct {
  long start = 0;
  long end = -1;
  BasicStochasticMatrix<Scalar> value;
  Scalar beta_product = Scalar(1);
  Scalar log_beta_product = Scalar(0);
};

using BackwardProduct = BasicBackwardProduct<double>;

/// Any type with `order()` and `matrix(long t)` returning a stochastic matrix.
template <typename Seq>
concept MatrixSource = requires(const Seq& seq, long t) {
  { seq.order() } -> std::convertible_to<int>;
  seq.matrix(t);
};

template <MatrixSource Seq>
auto backward_product(const Seq& seq, long s, long k) {
  using Matrix = std::decay_t<decltype(seq.matrix(0))>;
  using Scalar = typename Matrix::Matrix::Scalar;
  if (s < 0) throw Error(ErrorCode::InvalidArgument, "start index must be nonnegative");
  if (k < s - 1) throw Error(ErrorCode::InvalidArgument, "end index below start - 1");
  const int n = seq.order();
  MatrixX<Scalar> acc = MatrixX<Scalar>::Identity(n, n);
  MatrixX<Scalar> tmp(n, n);
  Scalar zero_tol = Scalar(kDefaultZeroTol);
  Scalar log_beta = Scalar(0);
  for (long t = s; t <= k; ++t) {
    const auto& a = seq.matrix(t);
    tmp.noalias() = a.entries() * acc;
    acc.swap(tmp);
    zero_tol = std::max(zero_tol, a.zero_tol());
    log_beta += std::log(min_positive_entry(a));
  }
  BasicBackwardProduct<Scalar> out;
  out.start = s;
  out.end = k;
  out.value = BasicStochasticMatrix<Scalar>::trusted(std::move(acc), zero_tol);
  out.log_beta_product = log_beta;
  out.beta_product = std::exp(log_beta);
  return out;
}

/// In-memory sequence: explicit list, repeating the last matrix past its end.
template <typename Scalar>
class BasicExplicitSequence {
 public:
  explicit BasicExplicitSequence(std::vector<BasicStochasticMatrix<Scalar>> matrices)
      : matrices_(std::move(matrices)) {
    if (matrices_.empty()) throw Error(ErrorCode::InvalidArgument, "empty sequence");
    for (const auto& m : matrices_)
      if (m.order() != matrices_.front().order())
        throw Error(ErrorCode::DimensionMismatch, "sequence orders differ");
  }

  int order() const { return matrices_.front().order(); }

  const BasicStochasticMatrix<Scalar>& matrix(long t) const {
    if (t < 0) throw Error(ErrorCode::GenerationFailure, "negative index");
    const auto idx = static_cast<std::size_t>(t);
    return idx < matrices_.size() ? matrices_[idx] : matrices_.back();
  }

 private:
  std::vector<BasicStochasticMatrix<Scalar>> matrices_;
};

using ExplicitSequence = BasicExplicitSequence<double>;

}  // namespace ipsm

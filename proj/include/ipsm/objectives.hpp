#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipsm/error.hpp"

namespace ipsm {

enum class Family { SquaredError, Softmax, AbsoluteError, Invex, LogSin, LinearExp };

std::string to_string(Family family);
Family family_from_string(const std::string& name);
bool is_convex_family(Family family);

/// One agent's training pair. `a` is a vector of length dim for the
/// inner-product families and a length-1 scalar for the others.
struct DataPoint {
  Eigen::VectorXd a;
  double b = 0.0;
};

struct Dataset {
  Family family = Family::SquaredError;
  int dim = 2;
  std::uint64_t seed = 0;
  std::vector<DataPoint> points;
};

/// Per-agent data for `agents` agents. Entries of a are uniform on
/// [-1, -0.1] U [0.1, 1] (softmax: [0.1, 1]); b is uniform on [-1, 1].
Dataset make_dataset(Family family, int agents, int dim, std::uint64_t seed);

nlohmann::json to_json(const Dataset& data);
Dataset dataset_from_json(const nlohmann::json& j);

/// Local objective f_i with value and subgradient oracles.
///
///   squared_error   (<a, x> - b)^2
///   softmax         a log(sum_j exp(x_j))        (b unused)
///   absolute_error  |<a, x> - b|
///   invex           |a y| (b x^2 - 1)^2           on (x, y)
///   log_sin         a log(1 + x^2 + y^2) + sin^2(x + b)
///   linear_exp      (a y - 1/2)^2 exp((x - b)^2)
///
/// At kinks the subgradient oracle returns the zero element of the
/// subdifferential (residual 0 for absolute_error, y = 0 for invex).
class Objective {
 public:
  Objective(Family family, DataPoint data, int dim);

  Family family() const { return family_; }
  int dim() const { return dim_; }
  const DataPoint& data() const { return data_; }

  bool convex() const;
  bool smooth() const;
  bool polyak_lojasiewicz() const { return pl_constant_.has_value(); }
  std::optional<double> pl_constant() const { return pl_constant_; }
  /// Unconstrained minimum value when one is known in closed form.
  std::optional<double> known_minimum() const { return known_minimum_; }

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd subgradient(const Eigen::VectorXd& x) const;

  /// Upper bound on the subgradient norm over [-1, 1]^dim.
  double lipschitz_bound() const;

  /// Distance-like measure to the nonsmooth locus; +inf for smooth families.
  double kink_distance(const Eigen::VectorXd& x) const;

 private:
  Family family_;
  DataPoint data_;
  int dim_;
  std::optional<double> pl_constant_;
  std::optional<double> known_minimum_;
};

Objective make_objective(Family family, const DataPoint& data, int dim);
std::vector<Objective> make_objectives(const Dataset& data);

struct FiniteDifferenceResult {
  double max_relative_error = 0.0;
  int points_used = 0;
};

/// max over points of ||g - central difference|| / (1 + ||g||). Points
/// closer than 10 h to the nonsmooth locus are skipped.
FiniteDifferenceResult finite_difference_check(const Objective& obj, std::span<const Eigen::VectorXd> points,
                                               double h = 1e-6);

/// f(x) = sum_i f_i(x).
class AggregateObjective {
 public:
  explicit AggregateObjective(std::vector<Objective> locals);

  int dim() const { return dim_; }
  int agents() const { return static_cast<int>(locals_.size()); }
  const std::vector<Objective>& locals() const { return locals_; }

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd subgradient(const Eigen::VectorXd& x) const;

  /// Minimum over the box [lower, upper]^dim when an independent oracle
  /// exists (least squares, invex).
  std::optional<double> known_minimum() const { return known_minimum_; }
  std::optional<Eigen::VectorXd> known_minimizer() const { return known_minimizer_; }
  /// True when the unconstrained least-squares minimizer already lies in the box.
  bool minimizer_in_box() const { return minimizer_in_box_; }
  /// PL constant 2 lambda_min(A^T A) of a full-rank squared-error aggregate.
  std::optional<double> pl_constant() const { return pl_constant_; }

 private:
  void solve_least_squares(double lower, double upper);

  std::vector<Objective> locals_;
  int dim_;
  std::optional<double> known_minimum_;
  std::optional<Eigen::VectorXd> known_minimizer_;
  bool minimizer_in_box_ = false;
  std::optional<double> pl_constant_;
};

}  // namespace ipsm

#include "ipsm/objectives.hpp"

#include <cmath>
#include <limits>

#include "ipsm/error.hpp"
#include "ipsm/rng.hpp"

namespace ipsm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

bool planar(Family f) { return f == Family::Invex || f == Family::LogSin || f == Family::LinearExp; }

double log_sum_exp(const Eigen::VectorXd& x) {
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::SquaredError: return "squared_error";
    case Family::Softmax: return "softmax";
    case Family::AbsoluteError: return "absolute_error";
    case Family::Invex: return "invex";
    case Family::LogSin: return "log_sin";
    case Family::LinearExp: return "linear_exp";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  for (Family f : {Family::SquaredError, Family::Softmax, Family::AbsoluteError, Family::Invex, Family::LogSin,
                   Family::LinearExp})
    if (to_string(f) == name) return f;
  throw Error(ErrorCode::UnknownFamily, "'" + name + "'");
}

bool is_convex_family(Family family) {
  return family == Family::SquaredError || family == Family::Softmax || family == Family::AbsoluteError;
}

Dataset make_dataset(Family family, int agents, int dim, std::uint64_t seed) {
  if (planar(family) && dim != 2)
    throw Error(ErrorCode::DimensionMismatch, to_string(family) + " is defined on R^2");
  if (dim < 1) throw Error(ErrorCode::DimensionMismatch, "dim must be positive");
  Dataset data;
  data.family = family;
  data.dim = dim;
  data.seed = seed;
  const bool vector_a = family == Family::SquaredError || family == Family::AbsoluteError;
  for (int i = 0; i < agents; ++i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i), Stream::Dataset);
    DataPoint p;
    p.a.resize(vector_a ? dim : 1);
    for (Eigen::Index j = 0; j < p.a.size(); ++j) {
      const double magnitude = rng.uniform(0.1, 1.0);
      const bool negative = rng.uniform() < 0.5;
      p.a(j) = (negative && family != Family::Softmax) ? -magnitude : magnitude;
    }
    p.b = rng.uniform(-1.0, 1.0);
    data.points.push_back(std::move(p));
  }
  return data;
}

nlohmann::json to_json(const Dataset& data) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : data.points) {
    std::vector<double> a(p.a.data(), p.a.data() + p.a.size());
    points.push_back({{"a", a}, {"b", p.b}});
  }
  return {{"family", to_string(data.family)}, {"dim", data.dim}, {"seed", data.seed}, {"points", points}};
}

Dataset dataset_from_json(const nlohmann::json& j) {
  Dataset data;
  data.family = family_from_string(j.at("family").get<std::string>());
  data.dim = j.at("dim").get<int>();
  data.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& p : j.at("points")) {
    const auto a = p.at("a").get<std::vector<double>>();
    data.points.push_back({Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())),
                           p.at("b").get<double>()});
  }
  return data;
}

Objective::Objective(Family family, DataPoint data, int dim) : family_(family), data_(std::move(data)), dim_(dim) {
  if (dim < 1) throw Error(ErrorCode::DimensionMismatch, "dim must be positive");
  if (planar(family) && dim != 2)
    throw Error(ErrorCode::DimensionMismatch, to_string(family) + " is defined on R^2");
  const bool vector_a = family == Family::SquaredError || family == Family::AbsoluteError;
  if (data_.a.size() != (vector_a ? dim : 1))
    throw Error(ErrorCode::DimensionMismatch, "coefficient length " + std::to_string(data_.a.size()) +
                                                  " does not fit " + to_string(family));
  switch (family) {
    case Family::SquaredError:
      known_minimum_ = 0.0;
      if (data_.a.squaredNorm() > 0.0) pl_constant_ = 2.0 * data_.a.squaredNorm();
      break;
    case Family::AbsoluteError:
      known_minimum_ = 0.0;
      break;
    case Family::Invex:
      known_minimum_ = 0.0;
      break;
    default:
      break;
  }
}

bool Objective::convex() const {
  // softmax is convex only for a nonnegative weight
  if (family_ == Family::Softmax) return data_.a(0) >= 0.0;
  return is_convex_family(family_);
}

bool Objective::smooth() const { return family_ != Family::AbsoluteError && family_ != Family::Invex; }

double Objective::value(const Eigen::VectorXd& x) const {
  const double a0 = data_.a(0);
  const double b = data_.b;
  switch (family_) {
    case Family::SquaredError: {
      const double r = data_.a.dot(x) - b;
      return r * r;
    }
    case Family::Softmax: return a0 * log_sum_exp(x);
    case Family::AbsoluteError: return std::abs(data_.a.dot(x) - b);
    case Family::Invex: {
      const double q = b * x(0) * x(0) - 1.0;
      return std::abs(a0 * x(1)) * q * q;
    }
    case Family::LogSin: {
      const double s = std::sin(x(0) + b);
      return a0 * std::log(1.0 + x(0) * x(0) + x(1) * x(1)) + s * s;
    }
    case Family::LinearExp: {
      const double r = a0 * x(1) - 0.5;
      const double u = x(0) - b;
      return r * r * std::exp(u * u);
    }
  }
  return 0.0;
}

Eigen::VectorXd Objective::subgradient(const Eigen::VectorXd& x) const {
  const double a0 = data_.a(0);
  const double b = data_.b;
  Eigen::VectorXd g(dim_);
  switch (family_) {
    case Family::SquaredError:
      g = 2.0 * (data_.a.dot(x) - b) * data_.a;
      break;
    case Family::Softmax: {
      const Eigen::ArrayXd e = (x.array() - x.maxCoeff()).exp();
      g = a0 * (e / e.sum()).matrix();
      break;
    }
    case Family::AbsoluteError:
      g = sign(data_.a.dot(x) - b) * data_.a;
      break;
    case Family::Invex: {
      const double q = b * x(0) * x(0) - 1.0;
      g(0) = std::abs(a0 * x(1)) * 2.0 * q * 2.0 * b * x(0);
      g(1) = std::abs(a0) * sign(x(1)) * q * q;
      break;
    }
    case Family::LogSin: {
      const double d = 1.0 + x(0) * x(0) + x(1) * x(1);
      g(0) = a0 * 2.0 * x(0) / d + std::sin(2.0 * (x(0) + b));
      g(1) = a0 * 2.0 * x(1) / d;
      break;
    }
    case Family::LinearExp: {
      const double r = a0 * x(1) - 0.5;
      const double u = x(0) - b;
      const double e = std::exp(u * u);
      g(0) = r * r * e * 2.0 * u;
      g(1) = 2.0 * a0 * r * e;
      break;
    }
  }
  return g;
}

double Objective::lipschitz_bound() const {
  const double a0 = std::abs(data_.a(0));
  const double b = std::abs(data_.b);
  switch (family_) {
    case Family::SquaredError: return 2.0 * (data_.a.lpNorm<1>() + b) * data_.a.norm();
    case Family::Softmax: return a0;
    case Family::AbsoluteError: return data_.a.norm();
    case Family::Invex: {
      const double m = 1.0 + b;
      return std::hypot(4.0 * a0 * b * m, a0 * m * m);
    }
    case Family::LogSin: return std::hypot(a0 + 1.0, a0);
    case Family::LinearExp: {
      const double r = a0 + 0.5;
      const double u = 1.0 + b;
      const double e = std::exp(u * u);
      return std::hypot(r * r * e * 2.0 * u, 2.0 * a0 * r * e);
    }
  }
  return kInf;
}

double Objective::kink_distance(const Eigen::VectorXd& x) const {
  switch (family_) {
    case Family::AbsoluteError: return std::abs(data_.a.dot(x) - data_.b) / data_.a.norm();
    case Family::Invex: return std::abs(x(1));
    default: return kInf;
  }
}

Objective make_objective(Family family, const DataPoint& data, int dim) { return Objective(family, data, dim); }

std::vector<Objective> make_objectives(const Dataset& data) {
  std::vector<Objective> out;
  for (const auto& p : data.points) out.emplace_back(data.family, p, data.dim);
  return out;
}

FiniteDifferenceResult finite_difference_check(const Objective& obj, std::span<const Eigen::VectorXd> points,
                                               double h) {
  FiniteDifferenceResult res;
  for (const auto& x : points) {
    if (obj.kink_distance(x) <= 10.0 * h) continue;
    const Eigen::VectorXd g = obj.subgradient(x);
    Eigen::VectorXd fd(obj.dim());
    for (int j = 0; j < obj.dim(); ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      fd(j) = (obj.value(xp) - obj.value(xm)) / (2.0 * h);
    }
    res.max_relative_error = std::max(res.max_relative_error, (g - fd).norm() / (1.0 + g.norm()));
    ++res.points_used;
  }
  return res;
}

AggregateObjective::AggregateObjective(std::vector<Objective> locals) : locals_(std::move(locals)) {
  if (locals_.empty()) throw Error(ErrorCode::InvalidArgument, "no local objectives");
  dim_ = locals_.front().dim();
  for (const auto& f : locals_)
    if (f.dim() != dim_) throw Error(ErrorCode::DimensionMismatch, "agents disagree on dim");

  const Family family = locals_.front().family();
  bool uniform = true;
  for (const auto& f : locals_) uniform = uniform && f.family() == family;
  if (!uniform) return;
  if (family == Family::SquaredError) {
    solve_least_squares(-1.0, 1.0);
  } else if (family == Family::Invex) {
    known_minimum_ = 0.0;
    known_minimizer_ = Eigen::VectorXd::Zero(2);
    minimizer_in_box_ = true;
  }
}

double AggregateObjective::value(const Eigen::VectorXd& x) const {
  double v = 0.0;
  for (const auto& f : locals_) v += f.value(x);
  return v;
}

Eigen::VectorXd AggregateObjective::subgradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  for (const auto& f : locals_) g += f.subgradient(x);
  return g;
}

void AggregateObjective::solve_least_squares(double lower, double upper) {
  const Eigen::Index m = static_cast<Eigen::Index>(locals_.size());
  Eigen::MatrixXd design(m, dim_);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design.row(i) = locals_[i].data().a.transpose();
    rhs(i) = locals_[i].data().b;
  }
  const Eigen::MatrixXd gram = design.transpose() * design;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 1e-12 * std::max(1.0, hi))) return;
  pl_constant_ = 2.0 * lo;

  Eigen::VectorXd x = design.colPivHouseholderQr().solve(rhs);
  minimizer_in_box_ = (x.array() >= lower).all() && (x.array() <= upper).all();
  if (!minimizer_in_box_) {
    // box-constrained quadratic: projected gradient with step 1/(2 lambda_max),
    // linearly convergent since the Gram matrix is positive definite
    x = x.cwiseMax(lower).cwiseMin(upper);
    const double step = 1.0 / (2.0 * hi);
    for (int it = 0; it < 1'000'000; ++it) {
      const Eigen::VectorXd next =
          (x - step * 2.0 * design.transpose() * (design * x - rhs)).cwiseMax(lower).cwiseMin(upper);
      const double moved = (next - x).lpNorm<Eigen::Infinity>();
      x = next;
      if (moved < 1e-15) break;
    }
  }
  known_minimizer_ = x;
  known_minimum_ = (design * x - rhs).squaredNorm();
}

}  // namespace ipsm

#pragma once

#include "inewton/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace inewton {

/// Anything the incremental solvers can iterate over: m components on R^n,
/// each with gradient and Hessian oracles.
template <class P>
concept FiniteSum = requires(const P& p, std::size_t i, const Vector& x) {
  { p.dimension() } -> std::convertible_to<std::size_t>;
  { p.size() } -> std::convertible_to<std::size_t>;
  { p.value(i, x) } -> std::convertible_to<double>;
  { p.gradient(i, x) } -> std::convertible_to<Vector>;
  { p.hessian(i, x) } -> std::convertible_to<Matrix>;
};

namespace detail {

// log(cosh(t)) without overflow for large |t|.
inline double log_cosh(double t) {
  const double a = std::abs(t);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

}  // namespace detail

/// f(x) = 1/2 x'Ax + b'x + offset + w * sum_j logcosh(x_j - s_j).
///
/// The Hessian is A + w diag(sech^2(x - s)), so its spectrum lies in
/// [lambda_min(A), lambda_max(A) + w] for w >= 0.
struct SmoothComponent {
  Matrix A;
  Vector b;
  double offset = 0.0;
  double logcosh_weight = 0.0;
  Vector logcosh_center;

  std::size_t dimension() const { return static_cast<std::size_t>(b.size()); }

  double value(const Vector& x) const {
    double v = 0.5 * x.dot(A * x) + b.dot(x) + offset;
    if (logcosh_weight != 0.0) {
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        v += logcosh_weight * detail::log_cosh(x(j) - logcosh_center(j));
      }
    }
    return v;
  }

  Vector gradient(const Vector& x) const {
    Vector g = A * x + b;
    if (logcosh_weight != 0.0) {
      g.array() += logcosh_weight * (x - logcosh_center).array().tanh();
    }
    return g;
  }

  Matrix hessian(const Vector& x) const {
    Matrix h = A;
    if (logcosh_weight != 0.0) {
      const Eigen::ArrayXd t = (x - logcosh_center).array().tanh();
      h.diagonal().array() += logcosh_weight * (1.0 - t * t);
    }
    return h;
  }
};

/// Descriptive constants attached to a problem instance.
struct ProblemMetadata {
  std::string family = "custom";
  double c = 0.0;  ///< uniform lower bound on component Hessian eigenvalues
  double C = 0.0;  ///< uniform upper bound
  std::optional<double> gradient_growth_M;
  std::optional<Vector> known_minimizer;
  std::optional<double> diameter_R;
};

/// A finite sum f = sum_i f_i of smooth strongly convex components.
/// Immutable after construction.
class Problem {
 public:
  Problem(std::vector<SmoothComponent> components, ProblemMetadata meta)
      : components_(std::move(components)), meta_(std::move(meta)) {
    validate();
  }

  std::size_t dimension() const { return components_.front().dimension(); }
  std::size_t size() const { return components_.size(); }

  double value(std::size_t i, const Vector& x) const {
    return components_[i].value(x);
  }
  Vector gradient(std::size_t i, const Vector& x) const {
    return components_[i].gradient(x);
  }
  Matrix hessian(std::size_t i, const Vector& x) const {
    return components_[i].hessian(x);
  }

  const std::vector<SmoothComponent>& components() const {
    return components_;
  }
  const ProblemMetadata& metadata() const { return meta_; }
  const std::string& family() const { return meta_.family; }
  double c() const { return meta_.c; }
  double C() const { return meta_.C; }
  double Q() const { return meta_.C / meta_.c; }
  const std::optional<double>& gradient_growth_M() const {
    return meta_.gradient_growth_M;
  }
  const std::optional<Vector>& known_minimizer() const {
    return meta_.known_minimizer;
  }

 private:
  void validate() const;

  std::vector<SmoothComponent> components_;
  ProblemMetadata meta_;
};

template <FiniteSum P>
Vector full_gradient(const P& problem, const Vector& x) {
  require_dimension(x, problem.dimension(), "full_gradient");
  Vector g = Vector::Zero(x.size());
  for (std::size_t i = 0; i < problem.size(); ++i) g += problem.gradient(i, x);
  return g;
}

template <FiniteSum P>
double full_value(const P& problem, const Vector& x) {
  require_dimension(x, problem.dimension(), "full_value");
  double v = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i) v += problem.value(i, x);
  return v;
}

template <FiniteSum P>
Matrix full_hessian(const P& problem, const Vector& x) {
  require_dimension(x, problem.dimension(), "full_hessian");
  Matrix h = Matrix::Zero(x.size(), x.size());
  for (std::size_t i = 0; i < problem.size(); ++i) h += problem.hessian(i, x);
  return h;
}

inline void Problem::validate() const {
  require(components_.size() >= 2, "problem needs at least two components");
  const auto n = components_.front().dimension();
  require(n >= 1, "problem dimension must be positive");
  for (const auto& comp : components_) {
    require(comp.dimension() == n &&
                static_cast<std::size_t>(comp.A.rows()) == n &&
                static_cast<std::size_t>(comp.A.cols()) == n,
            "component dimensions disagree");
    require(comp.logcosh_weight >= 0.0, "log-cosh weight must be >= 0");
    if (comp.logcosh_weight != 0.0) {
      require(static_cast<std::size_t>(comp.logcosh_center.size()) == n,
              "log-cosh center has wrong dimension");
    }
  }
  require(meta_.c > 0.0 && meta_.C >= meta_.c,
          "Hessian bounds must satisfy 0 < c <= C");
  if (meta_.gradient_growth_M) {
    require(*meta_.gradient_growth_M > 0.0, "gradient growth M must be > 0");
  }
  if (meta_.known_minimizer) {
    require_dimension(*meta_.known_minimizer, n, "known_minimizer");
    const double residual = full_gradient(*this, *meta_.known_minimizer).norm();
    require(residual <= 1e-10 * (1.0 + meta_.C),
            "known_minimizer is not stationary (gradient norm " +
                std::to_string(residual) + ")");
  }
}

namespace detail {

inline Matrix random_orthogonal(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(n, n);
}

inline Vector random_normal(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = normal(rng);
  return v;
}

// Symmetric matrix with prescribed spectrum in a random eigenbasis.
inline Matrix random_spd(std::mt19937_64& rng, const Vector& eigenvalues) {
  const auto n = static_cast<std::size_t>(eigenvalues.size());
  const Matrix q = random_orthogonal(rng, n);
  Matrix a = q * eigenvalues.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

// Spectrum log-uniform in [lo, hi].
inline Vector random_spectrum(std::mt19937_64& rng, std::size_t n, double lo,
                              double hi) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector v(n);
  const double span = std::log(hi / lo);
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    v(j) = lo * std::exp(unit(rng) * span);
  }
  return v;
}

inline Vector solve_spd(const Matrix& a, const Vector& rhs) {
  Eigen::LLT<Matrix> llt(a);
  Vector x = llt.solve(rhs);
  // One step of iterative refinement.
  x += llt.solve(rhs - a * x);
  return x;
}

}  // namespace detail

/// Quadratic components 1/2 x'A_i x + b_i'x with explicitly given data.
/// c and C are the extreme eigenvalues over all A_i; the minimizer is solved.
inline Problem make_quadratic(std::vector<Matrix> hessians,
                              std::vector<Vector> linear,
                              std::string family = "quadratic") {
  require(hessians.size() == linear.size(),
          "make_quadratic: need one linear term per Hessian");
  require(hessians.size() >= 2, "make_quadratic: m must be >= 2");
  std::vector<SmoothComponent> comps;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  Matrix total = Matrix::Zero(hessians.front().rows(), hessians.front().cols());
  Vector total_b = Vector::Zero(linear.front().size());
  for (std::size_t i = 0; i < hessians.size(); ++i) {
    const auto bounds = eigen_bounds(hessians[i]);
    lo = std::min(lo, bounds.min);
    hi = std::max(hi, bounds.max);
    total += hessians[i];
    total_b += linear[i];
    comps.push_back({std::move(hessians[i]), std::move(linear[i]), 0.0, 0.0,
                     Vector()});
  }
  ProblemMetadata meta;
  meta.family = std::move(family);
  meta.c = lo;
  meta.C = hi;
  meta.known_minimizer = detail::solve_spd(total, -total_b);
  return Problem(std::move(comps), std::move(meta));
}

/// Random quadratic sum whose component spectra lie in [1, condition_target].
inline Problem make_quadratic_sum(std::uint64_t seed, std::size_t n,
                                  std::size_t m, double condition_target) {
  require(n >= 1, "make_quadratic_sum: n must be >= 1");
  require(m >= 2, "make_quadratic_sum: m must be >= 2");
  require(condition_target >= 1.0,
          "make_quadratic_sum: condition_target must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Matrix> hessians;
  std::vector<Vector> linear;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < m; ++i) {
    const Vector spectrum =
        detail::random_spectrum(rng, n, 1.0, condition_target);
    lo = std::min(lo, spectrum.minCoeff());
    hi = std::max(hi, spectrum.maxCoeff());
    hessians.push_back(detail::random_spd(rng, spectrum));
    linear.push_back(detail::random_normal(rng, n));
  }
  Problem generated =
      make_quadratic(std::move(hessians), std::move(linear), "quadratic_sum");
  // Record the constructed spectrum ends rather than re-estimated ones.
  ProblemMetadata meta = generated.metadata();
  meta.c = lo;
  meta.C = hi;
  return Problem(generated.components(), std::move(meta));
}

/// Components sharing a common minimizer x*:
///   f_i(x) = 1/2 (x - x*)'A_i(x - x*) [+ w sum_j logcosh(x_j - x*_j)].
/// The gradient growth constant M = C / (c m) holds since
/// |grad f_i(x)| <= C |x - x*| and |grad f(x)| >= c m |x - x*|.
inline Problem make_zero_residual_problem(std::uint64_t seed, std::size_t n,
                                          std::size_t m, bool nonquadratic,
                                          double condition_target = 10.0) {
  require(n >= 1, "make_zero_residual_problem: n must be >= 1");
  require(m >= 2, "make_zero_residual_problem: m must be >= 2");
  require(condition_target >= 1.0,
          "make_zero_residual_problem: condition_target must be >= 1");
  std::mt19937_64 rng(seed);
  const Vector x_star = detail::random_normal(rng, n);

  // With the log-cosh term, part of the band is reserved for its curvature.
  const double quad_top =
      nonquadratic ? 0.5 * (1.0 + condition_target) : condition_target;
  const double weight =
      nonquadratic ? std::min(1.0, condition_target - quad_top) : 0.0;

  std::vector<SmoothComponent> comps;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < m; ++i) {
    const Vector spectrum = detail::random_spectrum(rng, n, 1.0, quad_top);
    lo = std::min(lo, spectrum.minCoeff());
    hi = std::max(hi, spectrum.maxCoeff());
    Matrix a = detail::random_spd(rng, spectrum);
    Vector b = -(a * x_star);
    const double offset = 0.5 * x_star.dot(a * x_star);
    comps.push_back({std::move(a), std::move(b), offset, weight,
                     weight != 0.0 ? x_star : Vector()});
  }
  ProblemMetadata meta;
  meta.family = nonquadratic ? "zero_residual_nonquadratic" : "zero_residual";
  meta.c = lo;
  meta.C = hi + weight;
  meta.gradient_growth_M = meta.C / (meta.c * static_cast<double>(m));
  meta.known_minimizer = x_star;
  return Problem(std::move(comps), std::move(meta));
}

/// f_1 = 1000x + eps x^2, f_2 = -1000x + eps x^2. The component gradients do
/// not vanish at the minimizer 0, so no gradient growth constant exists.
inline Problem make_example1(double epsilon) {
  require(epsilon > 0.0, "make_example1: epsilon must be > 0");
  std::vector<SmoothComponent> comps;
  for (double sign : {1.0, -1.0}) {
    comps.push_back({Matrix::Constant(1, 1, 2.0 * epsilon),
                     Vector::Constant(1, sign * 1000.0), 0.0, 0.0, Vector()});
  }
  ProblemMetadata meta;
  meta.family = "example1";
  meta.c = 2.0 * epsilon;
  meta.C = 2.0 * epsilon;
  meta.known_minimizer = Vector::Zero(1);
  return Problem(std::move(comps), std::move(meta));
}

}  // namespace inewton

#pragma once

#include "inewton/linalg.hpp"
#include "inewton/problem.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace inewton {

/// Scalar residual g(x) = t + beta * tanh(t) with t = a'x - b.
///
/// beta = 0 gives a linear residual. For beta >= 0 the map t -> g is strictly
/// increasing with slope in [1, 1 + beta], so g vanishes exactly where t does.
struct ResidualComponent {
  Vector a;
  double b = 0.0;
  double beta = 0.0;

  std::size_t dimension() const { return static_cast<std::size_t>(a.size()); }

  double residual(const Vector& x) const {
    const double t = a.dot(x) - b;
    return t + beta * std::tanh(t);
  }

  Vector residual_gradient(const Vector& x) const {
    const double th = std::tanh(a.dot(x) - b);
    return (1.0 + beta * (1.0 - th * th)) * a;
  }

  double residual_curvature(const Vector& x) const {
    // d^2 g / dt^2
    const double th = std::tanh(a.dot(x) - b);
    return -2.0 * beta * th * (1.0 - th * th);
  }
};

struct LeastSquaresMetadata {
  std::string family = "nlls";
  bool zero_residual = false;
  /// Upper bound on |grad g_i|^2 over the region of interest.
  std::optional<double> C_gn;
  std::optional<Vector> known_minimizer;
};

/// f = sum_i 1/2 g_i(x)^2.
class LeastSquaresProblem {
 public:
  LeastSquaresProblem(std::vector<ResidualComponent> residuals,
                      LeastSquaresMetadata meta)
      : residuals_(std::move(residuals)), meta_(std::move(meta)) {
    require(residuals_.size() >= 2, "least squares problem needs m >= 2");
    const auto n = residuals_.front().dimension();
    require(n >= 1, "least squares dimension must be positive");
    for (const auto& r : residuals_) {
      require(r.dimension() == n, "residual dimensions disagree");
      require(r.beta >= 0.0, "residual nonlinearity beta must be >= 0");
    }
    if (meta_.C_gn) require(*meta_.C_gn > 0.0, "C_gn must be > 0");
    if (meta_.known_minimizer) {
      require_dimension(*meta_.known_minimizer, n, "known_minimizer");
    }
  }

  std::size_t dimension() const { return residuals_.front().dimension(); }
  std::size_t size() const { return residuals_.size(); }

  double residual(std::size_t i, const Vector& x) const {
    return residuals_[i].residual(x);
  }
  Vector residual_gradient(std::size_t i, const Vector& x) const {
    return residuals_[i].residual_gradient(x);
  }

  double value(std::size_t i, const Vector& x) const {
    const double g = residual(i, x);
    return 0.5 * g * g;
  }
  Vector gradient(std::size_t i, const Vector& x) const {
    return residual(i, x) * residual_gradient(i, x);
  }
  /// Exact Hessian of 1/2 g_i^2 (the Gauss-Newton term plus g_i * Hess g_i).
  Matrix hessian(std::size_t i, const Vector& x) const {
    const auto& r = residuals_[i];
    const Vector dg = r.residual_gradient(x);
    Matrix h = dg * dg.transpose();
    h += residual(i, x) * r.residual_curvature(x) * (r.a * r.a.transpose());
    return h;
  }

  const std::vector<ResidualComponent>& residuals() const { return residuals_; }
  const LeastSquaresMetadata& metadata() const { return meta_; }
  const std::string& family() const { return meta_.family; }
  const std::optional<double>& C_gn() const { return meta_.C_gn; }
  const std::optional<Vector>& known_minimizer() const {
    return meta_.known_minimizer;
  }

 private:
  std::vector<ResidualComponent> residuals_;
  LeastSquaresMetadata meta_;
};

/// Linear residuals g_i(x) = a_i'x - b_i given explicitly. The minimizer is
/// the least-squares solution when the a_i span R^n.
inline LeastSquaresProblem make_linear_residuals(std::vector<Vector> rows,
                                                 std::vector<double> rhs) {
  require(rows.size() == rhs.size(),
          "make_linear_residuals: need one right-hand side per row");
  require(rows.size() >= 2, "make_linear_residuals: m must be >= 2");
  const auto n = rows.front().size();
  Matrix design(static_cast<Eigen::Index>(rows.size()), n);
  Vector target(static_cast<Eigen::Index>(rows.size()));
  double c_gn = 0.0;
  std::vector<ResidualComponent> residuals;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == n, "make_linear_residuals: ragged rows");
    design.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    target(static_cast<Eigen::Index>(i)) = rhs[i];
    c_gn = std::max(c_gn, rows[i].squaredNorm());
    residuals.push_back({std::move(rows[i]), rhs[i], 0.0});
  }
  LeastSquaresMetadata meta;
  meta.family = "linear_residuals";
  meta.C_gn = c_gn;
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() == n) {
    meta.known_minimizer = qr.solve(target);
    meta.zero_residual =
        (design * *meta.known_minimizer - target).norm() <=
        1e-12 * (1.0 + target.norm());
  }
  return LeastSquaresProblem(std::move(residuals), std::move(meta));
}

/// Random least-squares instance with m >= n residuals.
///
/// zero_residual: b_i = a_i'x* so every residual vanishes at the stored x*,
///   and beta > 0 bends each residual smoothly around that common root.
/// otherwise: linear residuals with noisy right-hand side; the stored
///   minimizer is the least-squares solution (beta must be 0).
inline LeastSquaresProblem make_nlls(std::uint64_t seed, std::size_t n,
                                     std::size_t m, bool zero_residual,
                                     double beta = 0.0) {
  require(n >= 1, "make_nlls: n must be >= 1");
  require(m >= 2 && m >= n, "make_nlls: need m >= max(2, n)");
  require(beta >= 0.0, "make_nlls: beta must be >= 0");
  require(zero_residual || beta == 0.0,
          "make_nlls: nonlinear residuals require zero_residual");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vector x_star = detail::random_normal(rng, n);
  Matrix design(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  Vector target(static_cast<Eigen::Index>(m));
  std::vector<ResidualComponent> residuals;
  double max_sq = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    Vector a = detail::random_normal(rng, n);
    double b = a.dot(x_star);
    if (!zero_residual) b += normal(rng);
    design.row(static_cast<Eigen::Index>(i)) = a.transpose();
    target(static_cast<Eigen::Index>(i)) = b;
    max_sq = std::max(max_sq, a.squaredNorm());
    residuals.push_back({std::move(a), b, beta});
  }
  LeastSquaresMetadata meta;
  meta.family = zero_residual ? (beta > 0.0 ? "nlls_zero_residual_nonlinear"
                                            : "nlls_zero_residual")
                              : "nlls";
  meta.zero_residual = zero_residual;
  meta.C_gn = (1.0 + beta) * (1.0 + beta) * max_sq;
  if (zero_residual) {
    meta.known_minimizer = x_star;
  } else {
    meta.known_minimizer =
        Vector(Eigen::ColPivHouseholderQR<Matrix>(design).solve(target));
  }
  return LeastSquaresProblem(std::move(residuals), std::move(meta));
}

}  // namespace inewton

#pragma once

#include "inewton/engine.hpp"
#include "inewton/least_squares.hpp"
#include "inewton/run.hpp"

#include <optional>
#include <vector>

namespace inewton {

/// Gauss-Newton inner state: H accumulates ridge*I + sum grad g grad g'.
using GNState = InnerState;

/// Incremental Gauss-Newton (extended Kalman filter) for f = sum 1/2 g_i^2.
/// Each inner step uses grad f_i = g_i grad g_i and the rank-one curvature
/// grad g_i grad g_i'. With a variable stepsize rule this is EKF-S.
class IncrementalGaussNewton {
 public:
  /// ridge = nullopt selects 1e-8 * (1 + mean_i |grad g_i(x_1^1)|^2).
  explicit IncrementalGaussNewton(const LeastSquaresProblem& problem,
                                  std::optional<double> ridge = std::nullopt)
      : problem_(&problem), ridge_(ridge) {
    if (ridge_) require(*ridge_ >= 0.0, "ridge must be >= 0");
  }

  const LeastSquaresProblem& problem() const { return *problem_; }
  std::size_t size() const { return problem_->size(); }
  std::size_t dimension() const { return problem_->dimension(); }

  Vector component_gradient(std::size_t j, const Vector& x) const {
    return problem_->gradient(j, x);
  }
  Matrix curvature(std::size_t j, const Vector& x) const {
    const Vector dg = problem_->residual_gradient(j, x);
    return dg * dg.transpose();
  }
  Vector full_gradient(const Vector& x) const {
    return inewton::full_gradient(*problem_, x);
  }
  std::optional<Vector> known_minimizer() const {
    return problem_->known_minimizer();
  }
  std::optional<double> curvature_upper_bound() const {
    return problem_->C_gn();
  }

  double ridge_for(const Vector& x0) const {
    if (ridge_) return *ridge_;
    double mean_sq = 0.0;
    for (std::size_t j = 0; j < size(); ++j) {
      mean_sq += problem_->residual_gradient(j, x0).squaredNorm();
    }
    mean_sq /= static_cast<double>(size());
    return 1e-8 * (1.0 + mean_sq);
  }

  Matrix initial_curvature(const Vector& x0) const {
    const auto n = static_cast<Eigen::Index>(dimension());
    return ridge_for(x0) * Matrix::Identity(n, n);
  }

  Matrix start_curvature_sum(const Vector& x) const {
    const auto n = static_cast<Eigen::Index>(dimension());
    Matrix s = Matrix::Zero(n, n);
    for (std::size_t j = 0; j < size(); ++j) s += curvature(j, x);
    return s;
  }

  GNState gn_inner_update(const GNState& state, double alpha) const {
    return detail::execute_inner_update(*this, state, alpha);
  }

  CycleOutcome run_cycle(const Vector& x_start, const Matrix& H_in,
                         std::size_t k, double alpha,
                         const CycleOptions& options = {}) const {
    return detail::execute_cycle(*this, x_start, H_in, k, alpha, options);
  }

 private:
  const LeastSquaresProblem* problem_;
  std::optional<double> ridge_;
};

/// EKF-S run: the shared cycle loop with Gauss-Newton inner updates. Variable
/// rules evaluate alpha_star with the Gauss-Newton accumulation and C_gn.
inline RunResult run_ekfs(const LeastSquaresProblem& problem,
                          const StepsizeRule& rule, const Vector& x0,
                          const RunConfig& config,
                          std::optional<double> ridge = std::nullopt) {
  IncrementalGaussNewton engine(problem, ridge);
  return run(engine, rule, x0, config);
}

}  // namespace inewton

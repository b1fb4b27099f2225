#pragma once

#include "inewton/linalg.hpp"
#include "inewton/problem.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace inewton {

/// How much per-cycle detail a run records.
///   minimal  - scalars plus extreme eigenvalues of H_m^k
///   standard - adds extreme eigenvalues of every H_i^k
///   full     - adds the Hessian error (evaluates curvature at each cycle
///              start, doubling curvature work)
enum class TraceMode { minimal, standard, full };

/// State inside a cycle: x = x_{i+1}^k after i inner updates, H = H_i^k.
struct InnerState {
  std::size_t k = 1;
  std::size_t i = 0;
  Vector x;
  Matrix H;
};

/// Record of one cycle k. Index conventions: vectors indexed by component
/// j = 0..m-1 correspond to components 1..m.
struct CycleTrace {
  std::size_t k = 0;
  double alpha = 0.0;
  double gamma = 0.0;  ///< alpha / k
  Vector start;        ///< x_1^k
  /// x_2^k .. x_m^k; empty when the cycle was thinned.
  std::vector<Vector> inner_points;
  bool has_inner_points = false;
  Vector end;  ///< x_1^{k+1}

  /// Extreme eigenvalues of H_i^k, i = 1..m (standard/full modes).
  std::vector<EigenBounds> inner_H_eigbounds;
  EigenBounds H_end_eigbounds;  ///< of H_m^k

  Vector grad_error;                       ///< e^k
  std::vector<double> grad_norms_at_start; ///< |grad f_j(x_1^k)|
  std::vector<double> inner_distances;     ///< |x_j^k - x_1^k|
  std::vector<double> inner_grad_deltas;   ///< |grad f_j(x_j^k) - grad f_j(x_1^k)|
  double full_grad_norm = 0.0;             ///< |grad f(x_1^k)|
  std::optional<double> dist_to_opt;       ///< |x_1^k - x*| when known

  std::optional<double> alpha_star;
  std::size_t trial_count = 1;
  std::optional<double> ehat_norm;
  /// |x_1^{k+1} - (x_1^k - gamma Hbar^{-1}(grad f(x_1^k) + e^k))|
  double identity_residual = 0.0;
};

struct CycleOutcome {
  CycleTrace trace;
  Matrix H_end;  ///< H_m^k
};

struct CycleOptions {
  TraceMode mode = TraceMode::standard;
  bool keep_inner_points = true;
};

/// Running sums used to form the Hessian error
///   ehat^k = (S1 - S2) / k,
/// S1 = H_m^k (all curvature evaluated at inner iterates so far) and
/// S2 = sum_{i<=k} sum_j curvature_j(x_1^i).
struct HessianErrorAccumulators {
  Matrix S1;
  Matrix S2;
};

struct HessianError {
  Matrix ehat;
  double norm = 0.0;
};

inline HessianError hessian_error(const HessianErrorAccumulators& accums,
                                  std::size_t k) {
  require(k >= 1, "hessian_error: k must be >= 1");
  HessianError out;
  out.ehat = (accums.S1 - accums.S2) / static_cast<double>(k);
  out.norm = symmetric_norm(out.ehat);
  return out;
}

/// Uses the true component Hessians as curvature.
struct ExactHessian {
  template <FiniteSum P>
  Matrix operator()(const P& problem, std::size_t i, const Vector& x) const {
    return problem.hessian(i, x);
  }
};

namespace detail {

/// One cycle of incremental (Gauss-)Newton updates
///   H_i = H_{i-1} + B_i(x_i),   x_{i+1} = x_i - alpha H_i^{-1} grad f_i(x_i)
/// where B_i is the model's curvature. The curvature of the current point
/// enters H before the solve.
template <class Model>
CycleOutcome execute_cycle(const Model& model, const Vector& x_start,
                           const Matrix& H_in, std::size_t k, double alpha,
                           const CycleOptions& options) {
  require(alpha > 0.0, "cycle stepsize alpha must be > 0");
  require(k >= 1, "cycle index k must be >= 1");
  const std::size_t m = model.size();
  const std::size_t n = model.dimension();
  require_dimension(x_start, n, "cycle start");
  require(static_cast<std::size_t>(H_in.rows()) == n &&
              static_cast<std::size_t>(H_in.cols()) == n,
          "cycle: H has wrong shape");

  CycleOutcome out;
  CycleTrace& t = out.trace;
  t.k = k;
  t.alpha = alpha;
  t.gamma = alpha / static_cast<double>(k);
  t.start = x_start;
  t.has_inner_points = options.keep_inner_points;
  t.grad_norms_at_start.resize(m);
  t.inner_distances.resize(m);
  t.inner_grad_deltas.resize(m);
  if (options.mode != TraceMode::minimal) t.inner_H_eigbounds.resize(m);

  Vector full_grad = Vector::Zero(static_cast<Eigen::Index>(n));
  Vector grad_error = Vector::Zero(static_cast<Eigen::Index>(n));
  Matrix H = H_in;
  Vector x = x_start;
  for (std::size_t j = 0; j < m; ++j) {
    const Vector g_start = model.component_gradient(j, x_start);
    full_grad += g_start;
    t.grad_norms_at_start[j] = g_start.norm();

    const Vector g = j == 0 ? g_start : model.component_gradient(j, x);
    const Matrix B = model.curvature(j, x);
    H += B;
    if (options.mode != TraceMode::minimal) {
      t.inner_H_eigbounds[j] = eigen_bounds(H);
    }
    t.inner_distances[j] = (x - x_start).norm();
    t.inner_grad_deltas[j] = (g - g_start).norm();
    grad_error += g - g_start + (B * (x_start - x)) / alpha;

    x -= alpha * spd_solve(H, g, k, j + 1);
    if (!all_finite(x)) {
      throw NumericalError("iterate became non-finite", k, j + 1);
    }
    if (options.keep_inner_points && j + 1 < m) t.inner_points.push_back(x);
  }
  t.end = x;
  t.full_grad_norm = full_grad.norm();
  t.grad_error = grad_error;
  t.H_end_eigbounds = eigen_bounds(H);
  if (const auto& xs = model.known_minimizer()) {
    t.dist_to_opt = (x_start - *xs).norm();
  }
  const Vector predicted =
      x_start - alpha * spd_solve(H, full_grad + grad_error, k, m);
  t.identity_residual = (t.end - predicted).norm();
  out.H_end = std::move(H);
  return out;
}

template <class Model>
InnerState execute_inner_update(const Model& model, const InnerState& state,
                                double alpha) {
  require(alpha > 0.0, "inner_update: alpha must be > 0");
  require(state.i < model.size(), "inner_update: cycle already complete");
  require_dimension(state.x, model.dimension(), "inner_update state");
  InnerState next = state;
  next.H += model.curvature(state.i, state.x);
  next.x -= alpha * spd_solve(next.H, model.component_gradient(state.i, state.x),
                              state.k, state.i + 1);
  next.i += 1;
  return next;
}

/// Lemma-1 form of the cycle: every iterate is formed from the start point
///   x_{i+1} = x_1 - alpha H_i^{-1} sum_{j<=i} (grad f_j(x_j)
///                                   + (1/alpha) B_j(x_j)(x_1 - x_j)).
template <class Model>
std::vector<Vector> execute_closed_form_cycle(const Model& model,
                                              const Vector& x_start,
                                              const Matrix& H_in,
                                              std::size_t k, double alpha) {
  require(alpha > 0.0, "closed_form_cycle: alpha must be > 0");
  require_dimension(x_start, model.dimension(), "closed_form_cycle start");
  const std::size_t m = model.size();
  std::vector<Vector> iterates;
  iterates.reserve(m);
  Matrix H = H_in;
  Vector aggregate = Vector::Zero(x_start.size());
  Vector x = x_start;
  for (std::size_t j = 0; j < m; ++j) {
    const Matrix B = model.curvature(j, x);
    H += B;
    aggregate += model.component_gradient(j, x) + (B * (x_start - x)) / alpha;
    x = x_start - alpha * spd_solve(H, aggregate, k, j + 1);
    iterates.push_back(x);
  }
  return iterates;
}

/// e^k = sum_j (grad f_j(x_j) - grad f_j(x_1) + (1/alpha) B_j(x_j)(x_1 - x_j))
/// for points = {x_1, ..., x_m}.
template <class Model>
Vector execute_gradient_error(const Model& model,
                              const std::vector<Vector>& points,
                              double alpha) {
  require(alpha > 0.0, "gradient_error: alpha must be > 0");
  require(points.size() == model.size(),
          "gradient_error: need exactly m points x_1..x_m");
  const Vector& x1 = points.front();
  Vector e = Vector::Zero(x1.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    const Vector& xj = points[j];
    e += model.component_gradient(j, xj) - model.component_gradient(j, x1) +
         (model.curvature(j, xj) * (x1 - xj)) / alpha;
  }
  return e;
}

}  // namespace detail

/// Incremental Newton method over a finite sum. The curvature oracle defaults
/// to the exact component Hessians; any symmetric oracle whose spectrum lies
/// in a known band [c~, C~] may be substituted (quasi-Newton variants).
template <FiniteSum P, class Curvature = ExactHessian>
class IncrementalNewton {
 public:
  explicit IncrementalNewton(const P& problem, Curvature curvature = {})
      : problem_(&problem), curvature_(std::move(curvature)) {}

  const P& problem() const { return *problem_; }
  std::size_t size() const { return problem_->size(); }
  std::size_t dimension() const { return problem_->dimension(); }

  Vector component_gradient(std::size_t j, const Vector& x) const {
    return problem_->gradient(j, x);
  }
  Matrix curvature(std::size_t j, const Vector& x) const {
    return curvature_(*problem_, j, x);
  }
  Vector full_gradient(const Vector& x) const {
    return inewton::full_gradient(*problem_, x);
  }
  std::optional<Vector> known_minimizer() const {
    return problem_->known_minimizer();
  }
  /// C used by the variable stepsize rule.
  std::optional<double> curvature_upper_bound() const { return problem_->C(); }

  /// H_0^1 = 0.
  Matrix initial_curvature(const Vector&) const {
    const auto n = static_cast<Eigen::Index>(dimension());
    return Matrix::Zero(n, n);
  }

  /// sum_j curvature_j(x), the increment of the S2 accumulator.
  Matrix start_curvature_sum(const Vector& x) const {
    const auto n = static_cast<Eigen::Index>(dimension());
    Matrix s = Matrix::Zero(n, n);
    for (std::size_t j = 0; j < size(); ++j) s += curvature(j, x);
    return s;
  }

  InnerState inner_update(const InnerState& state, double alpha) const {
    return detail::execute_inner_update(*this, state, alpha);
  }

  CycleOutcome run_cycle(const Vector& x_start, const Matrix& H_in,
                         std::size_t k, double alpha,
                         const CycleOptions& options = {}) const {
    return detail::execute_cycle(*this, x_start, H_in, k, alpha, options);
  }

  std::vector<Vector> closed_form_cycle(const Vector& x_start,
                                        const Matrix& H_in, std::size_t k,
                                        double alpha) const {
    return detail::execute_closed_form_cycle(*this, x_start, H_in, k, alpha);
  }

  Vector gradient_error(const std::vector<Vector>& points,
                        double alpha) const {
    return detail::execute_gradient_error(*this, points, alpha);
  }

  /// Residual of the inexact perturbed Newton form of a completed cycle,
  /// recomputed from the trace and H_m^k.
  double outer_step_identity_check(const CycleTrace& trace,
                                   const Matrix& H_m) const {
    std::vector<Vector> points;
    points.push_back(trace.start);
    require(trace.has_inner_points,
            "outer_step_identity_check: trace was thinned");
    for (const auto& p : trace.inner_points) points.push_back(p);
    const Vector e = gradient_error(points, trace.alpha);
    const Matrix H_bar = H_m / static_cast<double>(trace.k);
    const Vector predicted =
        trace.start -
        trace.gamma * spd_solve(H_bar, full_gradient(trace.start) + e, trace.k,
                                size());
    return (trace.end - predicted).norm();
  }

 private:
  const P* problem_;
  Curvature curvature_;
};

}  // namespace inewton

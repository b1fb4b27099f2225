#pragma once

#include "inewton/engine.hpp"
#include "inewton/stepsize.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace inewton {

enum class Termination { converged, max_cycles, stepsize_failure, numerical_error };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_cycles: return "max_cycles";
    case Termination::stepsize_failure: return "stepsize_failure";
    case Termination::numerical_error: return "numerical_error";
  }
  return "unknown";
}

struct RunConfig {
  std::size_t max_cycles = 1000;
  double grad_tolerance = 1e-8;
  TraceMode trace_mode = TraceMode::standard;
  /// Cycles up to this index keep their inner points; later ones are thinned.
  std::size_t full_storage_cycles = 1000;
  /// When false only the scalar histories are kept.
  bool record_traces = true;
};

struct RunResult {
  std::vector<CycleTrace> traces;
  Vector final_x;
  double final_grad_norm = 0.0;
  std::size_t cycles_used = 0;
  Termination termination = Termination::max_cycles;
  std::string message;

  /// |grad f(x_1^k)| for k = 1..cycles_used+1.
  std::vector<double> grad_norm_history;
  /// |x_1^k - x*| for k = 1..cycles_used+1, when the minimizer is known.
  std::vector<double> distance_history;
  std::vector<double> alpha_history;
  /// Diagonal of the bounding box of every visited point, an upper bound on
  /// the diameter R of the iterate set.
  double observed_diameter = 0.0;
};

/// Runs cycles until |grad f(x_1^k)| <= grad_tolerance or max_cycles cycles
/// have completed. Numerical failures end the run and keep the partial trace.
template <class Engine>
RunResult run(const Engine& engine, const StepsizeRule& rule, const Vector& x0,
              const RunConfig& config) {
  require(config.grad_tolerance > 0.0, "run: grad_tolerance must be > 0");
  require_dimension(x0, engine.dimension(), "run start point");
  StepsizeController controller(rule);
  if (rule_eta(rule)) {
    require(engine.curvature_upper_bound().has_value(),
            "variable stepsize rules need a curvature upper bound C");
  }

  RunResult result;
  const auto known = engine.known_minimizer();
  Vector x = x0;
  Matrix H = engine.initial_curvature(x0);
  HessianErrorAccumulators accums;
  if (config.trace_mode == TraceMode::full) {
    accums.S1 = Matrix::Zero(H.rows(), H.cols());
    accums.S2 = Matrix::Zero(H.rows(), H.cols());
  }
  Vector box_lo = x0;
  Vector box_hi = x0;
  auto visit = [&](const Vector& p) {
    box_lo = box_lo.cwiseMin(p);
    box_hi = box_hi.cwiseMax(p);
  };

  for (std::size_t k = 1;; ++k) {
    const double grad_norm = engine.full_gradient(x).norm();
    result.grad_norm_history.push_back(grad_norm);
    if (known) result.distance_history.push_back((x - *known).norm());
    if (grad_norm <= config.grad_tolerance) {
      result.termination = Termination::converged;
      break;
    }
    if (k > config.max_cycles) {
      result.termination = Termination::max_cycles;
      break;
    }
    CycleOptions options;
    options.mode = config.trace_mode;
    options.keep_inner_points = k <= config.full_storage_cycles;
    StepDecision decision;
    try {
      decision = controller.choose(engine, x, H, k, options);
    } catch (const NumericalError& err) {
      result.termination = Termination::numerical_error;
      result.message = err.what();
      break;
    }
    CycleTrace& trace = decision.accepted.trace;
    if (!std::isfinite(decision.alpha) ||
        (decision.alpha_star && !std::isfinite(*decision.alpha_star))) {
      result.termination = Termination::stepsize_failure;
      result.message = "non-finite stepsize at cycle " + std::to_string(k);
      break;
    }
    if (config.trace_mode == TraceMode::full) {
      accums.S1 = decision.accepted.H_end;
      accums.S2 += engine.start_curvature_sum(x);
      trace.ehat_norm = hessian_error(accums, k).norm;
    }
    for (const auto& p : trace.inner_points) visit(p);
    visit(trace.end);
    H = std::move(decision.accepted.H_end);
    x = trace.end;
    result.alpha_history.push_back(decision.alpha);
    ++result.cycles_used;
    if (config.record_traces) result.traces.push_back(std::move(trace));
  }
  result.final_x = x;
  result.final_grad_norm = result.grad_norm_history.back();
  result.observed_diameter = (box_hi - box_lo).norm();
  return result;
}

}  // namespace inewton

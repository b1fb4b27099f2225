#pragma once

#include "inewton/engine.hpp"
#include "inewton/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>

namespace inewton {

/// alpha^k = 1.
struct UnitStep {};

/// alpha^k = gamma * k, i.e. a constant normalized stepsize.
struct ConstantNormalized {
  double gamma = 0.01;
};

/// Where the first bisection trial of a cycle starts.
enum class InitialAlphaPolicy {
  fixed,       ///< initial_alpha every cycle
  warm_start,  ///< previous accepted alpha scaled by k/(k-1), floor 1
  linear,      ///< max(1, growth_slope * k)
};

/// Trial cycles with alpha(j+1) = max(1, tau * alpha(j)) until
/// 1 <= alpha <= max(1, alpha_star(alpha)).
struct VariableBisection {
  double eta = 0.9;
  double tau = 0.5;
  double initial_alpha = 1.0;
  InitialAlphaPolicy policy = InitialAlphaPolicy::warm_start;
  double growth_slope = 0.0;
};

/// alpha^k = (nu kappa) k when 1 <= (nu kappa) k <= max(1, alpha_star),
/// otherwise 1.
struct LinearGrowth {
  double eta_hat = 0.9;
  double nu_hat = 0.5;
  double kappa_hat = 0.01;
};

using StepsizeRule =
    std::variant<UnitStep, ConstantNormalized, VariableBisection, LinearGrowth>;

inline std::string rule_name(const StepsizeRule& rule) {
  return std::visit(
      [](const auto& r) -> std::string {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, UnitStep>) return "unit";
        if constexpr (std::is_same_v<T, ConstantNormalized>) return "constant";
        if constexpr (std::is_same_v<T, VariableBisection>) return "bisection";
        if constexpr (std::is_same_v<T, LinearGrowth>) return "linear_growth";
      },
      rule);
}

/// The stepsize control parameter of the rule, if it has one.
inline std::optional<double> rule_eta(const StepsizeRule& rule) {
  if (const auto* b = std::get_if<VariableBisection>(&rule)) return b->eta;
  if (const auto* g = std::get_if<LinearGrowth>(&rule)) return g->eta_hat;
  return std::nullopt;
}

inline void validate_rule(const StepsizeRule& rule) {
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ConstantNormalized>) {
          require(r.gamma > 0.0, "constant rule: gamma must be > 0");
        } else if constexpr (std::is_same_v<T, VariableBisection>) {
          require(r.eta > 0.0 && r.eta < 1.0, "bisection: need 0 < eta < 1");
          require(r.tau > 0.0 && r.tau < 1.0, "bisection: need 0 < tau < 1");
          require(r.initial_alpha >= 1.0,
                  "bisection: initial_alpha must be >= 1");
          require(r.policy != InitialAlphaPolicy::linear || r.growth_slope > 0,
                  "bisection: linear policy needs growth_slope > 0");
        } else if constexpr (std::is_same_v<T, LinearGrowth>) {
          require(r.eta_hat > 0.0 && r.eta_hat < 1.0,
                  "linear growth: need 0 < eta_hat < 1");
          require(r.nu_hat > 0.0 && r.nu_hat < 1.0,
                  "linear growth: need 0 < nu_hat < 1");
          require(r.kappa_hat > 0.0, "linear growth: kappa_hat must be > 0");
        }
      },
      rule);
}

/// Variable-stepsize bound of a completed cycle with d = x_1^{k+1} - x_1^k:
///
///   alpha_star = (1-eta)/C * d'H_m d / (|d| sum_{i=2..m} |x_i - x_1|
///                                       + (m/2) |d|^2),
///
/// and 0 when d = 0.
inline double alpha_star(const CycleTrace& cycle, const Matrix& H_m,
                         double eta, double C) {
  require(eta > 0.0 && eta < 1.0, "alpha_star: need 0 < eta < 1");
  require(C > 0.0, "alpha_star: C must be > 0");
  const Vector d = cycle.end - cycle.start;
  const double d_norm = d.norm();
  if (d_norm == 0.0) return 0.0;
  double spread = 0.0;
  for (std::size_t i = 1; i < cycle.inner_distances.size(); ++i) {
    spread += cycle.inner_distances[i];
  }
  const double m = static_cast<double>(cycle.inner_distances.size());
  const double denom = d_norm * spread + 0.5 * m * d_norm * d_norm;
  return (1.0 - eta) / C * d.dot(H_m * d) / denom;
}

inline double constant_normalized(std::size_t k, double gamma) {
  require(gamma > 0.0, "constant_normalized: gamma must be > 0");
  require(k >= 1, "constant_normalized: k must be >= 1");
  return gamma * static_cast<double>(k);
}

/// Upper bound on bisection trials starting from initial_alpha.
inline std::size_t bisection_trial_bound(double initial_alpha, double tau) {
  if (initial_alpha <= 1.0) return 1;
  return static_cast<std::size_t>(
             std::ceil(std::log(initial_alpha) / std::log(1.0 / tau))) +
         1;
}

struct StepDecision {
  double alpha = 1.0;
  std::optional<double> alpha_star;
  std::size_t trial_count = 1;
  CycleOutcome accepted;
};

namespace detail {

template <class Engine>
double required_upper_bound(const Engine& engine) {
  const std::optional<double> C = engine.curvature_upper_bound();
  require(C.has_value(),
          "variable stepsize rules need a curvature upper bound C in the "
          "problem metadata");
  return *C;
}

}  // namespace detail

template <class Engine>
StepDecision choose_bisection(const Engine& engine, const Vector& x_start,
                              const Matrix& H_in, std::size_t k, double eta,
                              double tau, double initial_alpha,
                              const CycleOptions& options = {}) {
  require(initial_alpha >= 1.0, "choose_bisection: initial_alpha must be >= 1");
  require(tau > 0.0 && tau < 1.0, "choose_bisection: need 0 < tau < 1");
  const double C = detail::required_upper_bound(engine);
  StepDecision decision;
  double alpha = initial_alpha;
  for (std::size_t trial = 1;; ++trial) {
    CycleOutcome outcome = engine.run_cycle(x_start, H_in, k, alpha, options);
    const double a_star = alpha_star(outcome.trace, outcome.H_end, eta, C);
    if (alpha == 1.0 || alpha <= std::max(1.0, a_star)) {
      decision.alpha = alpha;
      decision.alpha_star = a_star;
      decision.trial_count = trial;
      decision.accepted = std::move(outcome);
      return decision;
    }
    alpha = std::max(1.0, tau * alpha);
  }
}

template <class Engine>
StepDecision choose_linear_growth(const Engine& engine, const Vector& x_start,
                                  const Matrix& H_in, std::size_t k,
                                  double eta_hat, double nu_hat,
                                  double kappa_hat,
                                  const CycleOptions& options = {}) {
  const double C = detail::required_upper_bound(engine);
  const double trial_alpha = nu_hat * kappa_hat * static_cast<double>(k);
  StepDecision decision;
  if (trial_alpha >= 1.0) {
    CycleOutcome outcome =
        engine.run_cycle(x_start, H_in, k, trial_alpha, options);
    const double a_star = alpha_star(outcome.trace, outcome.H_end, eta_hat, C);
    if (trial_alpha <= std::max(1.0, a_star)) {
      decision.alpha = trial_alpha;
      decision.alpha_star = a_star;
      decision.trial_count = 1;
      decision.accepted = std::move(outcome);
      return decision;
    }
    decision.trial_count = 2;
  }
  decision.alpha = 1.0;
  decision.accepted = engine.run_cycle(x_start, H_in, k, 1.0, options);
  decision.alpha_star = alpha_star(decision.accepted.trace,
                                   decision.accepted.H_end, eta_hat, C);
  return decision;
}

/// Applies a StepsizeRule cycle after cycle. Holds the warm-start state of a
/// single run.
class StepsizeController {
 public:
  explicit StepsizeController(StepsizeRule rule) : rule_(std::move(rule)) {
    validate_rule(rule_);
  }

  const StepsizeRule& rule() const { return rule_; }

  template <class Engine>
  StepDecision choose(const Engine& engine, const Vector& x_start,
                      const Matrix& H_in, std::size_t k,
                      const CycleOptions& options = {}) {
    StepDecision decision = std::visit(
        [&](const auto& r) -> StepDecision {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, UnitStep>) {
            return fixed(engine, x_start, H_in, k, 1.0, options);
          } else if constexpr (std::is_same_v<T, ConstantNormalized>) {
            return fixed(engine, x_start, H_in, k,
                         constant_normalized(k, r.gamma), options);
          } else if constexpr (std::is_same_v<T, VariableBisection>) {
            return choose_bisection(engine, x_start, H_in, k, r.eta, r.tau,
                                    initial_alpha(r, k), options);
          } else {
            return choose_linear_growth(engine, x_start, H_in, k, r.eta_hat,
                                        r.nu_hat, r.kappa_hat, options);
          }
        },
        rule_);
    previous_alpha_ = decision.alpha;
    decision.accepted.trace.alpha_star = decision.alpha_star;
    decision.accepted.trace.trial_count = decision.trial_count;
    return decision;
  }

 private:
  template <class Engine>
  static StepDecision fixed(const Engine& engine, const Vector& x_start,
                            const Matrix& H_in, std::size_t k, double alpha,
                            const CycleOptions& options) {
    StepDecision decision;
    decision.alpha = alpha;
    decision.accepted = engine.run_cycle(x_start, H_in, k, alpha, options);
    return decision;
  }

  double initial_alpha(const VariableBisection& r, std::size_t k) const {
    switch (r.policy) {
      case InitialAlphaPolicy::fixed:
        return r.initial_alpha;
      case InitialAlphaPolicy::linear:
        return std::max(1.0, r.growth_slope * static_cast<double>(k));
      case InitialAlphaPolicy::warm_start:
        break;
    }
    if (!previous_alpha_ || k < 2) return r.initial_alpha;
    return std::max(1.0, *previous_alpha_ * static_cast<double>(k) /
                             static_cast<double>(k - 1));
  }

  StepsizeRule rule_;
  std::optional<double> previous_alpha_;
};

}  // namespace inewton

#pragma once

#include "inewton/engine.hpp"
#include "inewton/linalg.hpp"
#include "inewton/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace inewton::diag {

/// Outcome of checking one inequality over a set of cycles. Margins are
/// relative: (bound - observed) / max(|bound|, |observed|), 0 when both vanish.
struct BoundReport {
  std::string bound_name;
  std::vector<std::size_t> cycles;  ///< cycle index of each margin entry
  std::vector<double> margins;      ///< worst relative margin per cycle
  double worst_margin = std::numeric_limits<double>::infinity();
  double tolerance = 1e-9;
  bool violated = false;
  std::size_t cycles_checked = 0;
  bool skipped = false;
  std::string notice;
};

inline double relative_margin(double bound, double observed) {
  const double scale = std::max(std::abs(bound), std::abs(observed));
  if (scale == 0.0) return 0.0;
  return (bound - observed) / scale;
}

namespace detail {

// Collects per-cycle minima of relative margins.
class MarginRecorder {
 public:
  MarginRecorder(std::string name, double tolerance) {
    report_.bound_name = std::move(name);
    report_.tolerance = tolerance;
  }

  void begin_cycle(std::size_t k) {
    flush();
    current_k_ = k;
    current_ = std::numeric_limits<double>::infinity();
    open_ = true;
  }

  void add(double bound, double observed) {
    current_ = std::min(current_, relative_margin(bound, observed));
  }

  BoundReport finish() {
    flush();
    report_.cycles_checked = report_.cycles.size();
    if (report_.cycles.empty()) report_.worst_margin = 0.0;
    report_.violated = report_.worst_margin < -report_.tolerance;
    return std::move(report_);
  }

  BoundReport skip(std::string notice) {
    report_.skipped = true;
    report_.notice = std::move(notice);
    report_.worst_margin = 0.0;
    return std::move(report_);
  }

 private:
  void flush() {
    if (!open_) return;
    open_ = false;
    if (current_ == std::numeric_limits<double>::infinity()) return;
    report_.cycles.push_back(current_k_);
    report_.margins.push_back(current_);
    report_.worst_margin = std::min(report_.worst_margin, current_);
  }

  BoundReport report_;
  std::size_t current_k_ = 0;
  double current_ = 0.0;
  bool open_ = false;
};

// sum_{i<j} (1+r)^{j-1-i} g_i for j = 0..m-1 (0-based, so j = 0 gives 0).
inline std::vector<double> geometric_prefix(const std::vector<double>& g,
                                            double r) {
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t j = 1; j < g.size(); ++j) {
    out[j] = (1.0 + r) * out[j - 1] + g[j - 1];
  }
  return out;
}

}  // namespace detail

/// Accumulated-curvature growth:
///   c((k-1)m + i) <= lambda_min(H_i^k),  lambda_max(H_i^k) <= C m k,
/// and c k m / 2 <= lambda_min(H_i^k) for k >= 2. Uses per-inner eigenvalue
/// bounds when the trace has them, otherwise H_m^k only.
inline BoundReport check_hessian_growth(const std::vector<CycleTrace>& traces,
                                        double c, double C, std::size_t m,
                                        double tolerance = 1e-9) {
  detail::MarginRecorder rec("hessian_growth", tolerance);
  const double md = static_cast<double>(m);
  for (const auto& t : traces) {
    const double k = static_cast<double>(t.k);
    rec.begin_cycle(t.k);
    auto check = [&](std::size_t i, const EigenBounds& eb) {
      const double id = static_cast<double>(i);
      rec.add(eb.min, c * ((k - 1.0) * md + id));
      rec.add(C * md * k, eb.max);
      if (t.k >= 2) rec.add(eb.min, c * k * md / 2.0);
    };
    if (t.inner_H_eigbounds.size() == m) {
      for (std::size_t i = 0; i < m; ++i) check(i + 1, t.inner_H_eigbounds[i]);
    } else {
      check(m, t.H_end_eigbounds);
    }
  }
  return rec.finish();
}

/// Gauss-Newton analogue of the upper growth bound:
///   lambda_max(H_m^k) <= k m C_gn + ridge.
inline BoundReport check_gn_curvature_growth(
    const std::vector<CycleTrace>& traces, double C_gn, std::size_t m,
    double ridge, double tolerance = 1e-9) {
  detail::MarginRecorder rec("gn_curvature_growth", tolerance);
  for (const auto& t : traces) {
    rec.begin_cycle(t.k);
    rec.add(static_cast<double>(t.k * m) * C_gn + ridge, t.H_end_eigbounds.max);
  }
  return rec.finish();
}

/// alpha_star^k / k <= phi = 2(1 - eta)Q on every cycle that recorded
/// alpha_star.
inline BoundReport check_gamma_star(const std::vector<CycleTrace>& traces,
                                    double eta, double Q,
                                    double tolerance = 1e-9) {
  detail::MarginRecorder rec("gamma_star", tolerance);
  const double phi = theory::phi(eta, Q);
  for (const auto& t : traces) {
    if (!t.alpha_star) continue;
    rec.begin_cycle(t.k);
    rec.add(phi, *t.alpha_star / static_cast<double>(t.k));
  }
  return rec.finish();
}

/// |x_i^k - x_1^k| <= gamma^k B_i^k(phi) |grad f(x_1^k)| for k >= 2, with the
/// cycle-dependent B recursion. Skipped when M is unset.
inline BoundReport check_inner_distance(const std::vector<CycleTrace>& traces,
                                        const theory::ProblemConstants& consts,
                                        double phi, double tolerance = 1e-9) {
  detail::MarginRecorder rec("inner_distance", tolerance);
  if (!consts.M) {
    return rec.skip("gradient growth constant M unset; check not applicable");
  }
  for (const auto& t : traces) {
    if (t.k < 2) continue;
    const auto B = theory::B_sequence_at(phi, t.k, consts);
    rec.begin_cycle(t.k);
    // i = 1 compares 0 with 0 and is skipped.
    for (std::size_t i = 1; i < consts.m && i < t.inner_distances.size(); ++i) {
      rec.add(t.gamma * B.B[i] * t.full_grad_norm, t.inner_distances[i]);
    }
  }
  return rec.finish();
}

/// delta_j^k = |grad f_j(x_j^k) - grad f_j(x_1^k)|
///   <= r^k sum_{i<j} (1 + r^k)^{j-1-i} |grad f_i(x_1^k)|,  r^k = 2Q gamma^k/m,
/// for k >= 2.
inline BoundReport check_delta_bound(const std::vector<CycleTrace>& traces,
                                     double Q, std::size_t m,
                                     double tolerance = 1e-9) {
  detail::MarginRecorder rec("delta_bound", tolerance);
  for (const auto& t : traces) {
    if (t.k < 2) continue;
    const double r = 2.0 * Q * t.gamma / static_cast<double>(m);
    const auto sums = detail::geometric_prefix(t.grad_norms_at_start, r);
    rec.begin_cycle(t.k);
    for (std::size_t j = 1; j < t.inner_grad_deltas.size(); ++j) {
      rec.add(r * sums[j], t.inner_grad_deltas[j]);
    }
  }
  return rec.finish();
}

/// |e^k| <= (r^k + 2Q/(km)) sum_{j=2..m} sum_{i<j} (1 + r^k)^{j-1-i}
///          |grad f_i(x_1^k)|  for k >= 2.
inline BoundReport check_gradient_error_bound(
    const std::vector<CycleTrace>& traces, double Q, std::size_t m,
    double tolerance = 1e-9) {
  detail::MarginRecorder rec("gradient_error_bound", tolerance);
  const double md = static_cast<double>(m);
  for (const auto& t : traces) {
    if (t.k < 2) continue;
    const double k = static_cast<double>(t.k);
    const double r = 2.0 * Q * t.gamma / md;
    const auto sums = detail::geometric_prefix(t.grad_norms_at_start, r);
    double total = 0.0;
    for (std::size_t j = 1; j < sums.size(); ++j) total += sums[j];
    rec.begin_cycle(t.k);
    rec.add((r + 2.0 * Q / (k * md)) * total, t.grad_error.norm());
  }
  return rec.finish();
}

/// |ehat^k| <= (C - c) m on every cycle; on convergent runs additionally the
/// mean of the last quartile is at most half the mean of the first quartile.
inline BoundReport check_hessian_error_decay(
    const std::vector<CycleTrace>& traces, double c, double C, std::size_t m,
    bool convergent, double tolerance = 1e-9) {
  detail::MarginRecorder rec("hessian_error_decay", tolerance);
  std::vector<double> values;
  for (const auto& t : traces) {
    if (!t.ehat_norm) continue;
    values.push_back(*t.ehat_norm);
    rec.begin_cycle(t.k);
    rec.add((C - c) * static_cast<double>(m), *t.ehat_norm);
  }
  if (values.empty()) {
    return rec.skip("Hessian error not recorded; run with trace_mode=full");
  }
  if (convergent && values.size() >= 4) {
    const std::size_t q = values.size() / 4;
    double first = 0.0;
    double last = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      first += values[i];
      last += values[values.size() - q + i];
    }
    rec.begin_cycle(traces.back().k);
    // Values at roundoff level (quadratic components) count as decayed.
    const double floor = 1e-12 * C * static_cast<double>(m);
    rec.add(0.5 * first / static_cast<double>(q) + floor,
            last / static_cast<double>(q));
  }
  return rec.finish();
}

/// Residual of the perturbed-Newton form of each cycle:
///   identity_residual <= 1e-9 (1 + |x_1^k|).
inline BoundReport check_outer_identity(const std::vector<CycleTrace>& traces,
                                        double relative_tolerance = 1e-9) {
  BoundReport report;
  report.bound_name = "outer_identity";
  report.tolerance = 0.0;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& t : traces) {
    const double bound = relative_tolerance * (1.0 + t.start.norm());
    const double margin = (bound - t.identity_residual) / bound;
    report.cycles.push_back(t.k);
    report.margins.push_back(margin);
    report.worst_margin = std::min(report.worst_margin, margin);
  }
  report.cycles_checked = report.cycles.size();
  if (report.cycles.empty()) report.worst_margin = 0.0;
  report.violated = report.worst_margin < 0.0;
  return report;
}

/// Closed-form gradient error of one cycle on the two-component example
/// f_1 = 1000x + eps x^2, f_2 = -1000x + eps x^2:
///   e^k = -(gamma/2 - 1/(2k)) (2k/(2k-1)) (1000 + 2 eps x),  gamma = alpha/k.
inline double example1_error_oracle(std::size_t k, double alpha, double x,
                                    double epsilon) {
  require(alpha > 0.0, "example1_error_oracle: alpha must be > 0");
  require(k >= 1, "example1_error_oracle: k must be >= 1");
  const double kd = static_cast<double>(k);
  const double gamma = alpha / kd;
  return -(gamma / 2.0 - 1.0 / (2.0 * kd)) * (2.0 * kd / (2.0 * kd - 1.0)) *
         (1000.0 + 2.0 * epsilon * x);
}

enum class RateClass { linear, sublinear, inconclusive };

inline std::string to_string(RateClass c) {
  switch (c) {
    case RateClass::linear: return "linear";
    case RateClass::sublinear: return "sublinear";
    case RateClass::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct RateFitOptions {
  double window_fraction = 0.5;  ///< tail fraction used for the log-linear fit
  double tail_fraction = 0.1;    ///< fraction used for ratio_tail
  double delta_rate = 0.02;
  double r_squared_threshold = 0.95;
  std::size_t min_length = 20;
};

struct RateFit {
  double window = 0.5;
  double rho_hat = 1.0;
  double r_squared = 0.0;
  double ratio_tail = 1.0;
  RateClass classification = RateClass::inconclusive;
  std::size_t points_used = 0;
  /// The series reached exactly 0 and was truncated there.
  bool exact_convergence = false;
};

/// Classifies the convergence of a positive series d_1, d_2, ... by a least
/// squares fit of log d_k over the tail window and the geometric mean of the
/// last ratios d_{k+1}/d_k.
inline RateFit fit_rate(const std::vector<double>& series,
                        const RateFitOptions& options = {}) {
  require(options.window_fraction > 0.0 && options.window_fraction <= 1.0,
          "fit_rate: window_fraction must be in (0, 1]");
  require(options.tail_fraction > 0.0 && options.tail_fraction <= 1.0,
          "fit_rate: tail_fraction must be in (0, 1]");
  require(series.size() >= options.min_length,
          "fit_rate: series must have at least " +
              std::to_string(options.min_length) + " entries");
  RateFit fit;
  fit.window = options.window_fraction;
  std::vector<double> d;
  d.reserve(series.size());
  for (double v : series) {
    require(std::isfinite(v) && v >= 0.0,
            "fit_rate: series entries must be finite and nonnegative");
    if (v == 0.0) {
      fit.exact_convergence = true;
      break;
    }
    d.push_back(v);
  }
  fit.points_used = d.size();
  if (d.size() < 3) return fit;

  const std::size_t N = d.size();
  const auto w = std::max<std::size_t>(
      3, static_cast<std::size_t>(
             std::ceil(options.window_fraction * static_cast<double>(N))));
  const std::size_t start = N - std::min(w, N);
  const double count = static_cast<double>(N - start);
  double mean_k = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = start; i < N; ++i) {
    mean_k += static_cast<double>(i);
    mean_y += std::log(d[i]);
  }
  mean_k /= count;
  mean_y /= count;
  double skk = 0.0;
  double sky = 0.0;
  double syy = 0.0;
  for (std::size_t i = start; i < N; ++i) {
    const double dk = static_cast<double>(i) - mean_k;
    const double dy = std::log(d[i]) - mean_y;
    skk += dk * dk;
    sky += dk * dy;
    syy += dy * dy;
  }
  const double slope = sky / skk;
  fit.rho_hat = std::exp(slope);
  const double ss_res = std::max(0.0, syy - slope * sky);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;

  const auto q = std::max<std::size_t>(
      1, static_cast<std::size_t>(options.tail_fraction *
                                  static_cast<double>(N)));
  fit.ratio_tail =
      std::exp((std::log(d[N - 1]) - std::log(d[N - 1 - q])) /
               static_cast<double>(q));

  const double threshold = 1.0 - options.delta_rate;
  if (fit.rho_hat <= threshold &&
      fit.r_squared >= options.r_squared_threshold) {
    fit.classification = RateClass::linear;
  } else if (fit.ratio_tail >= threshold) {
    fit.classification = RateClass::sublinear;
  }
  return fit;
}

/// Which checks apply to a trace set and with which constants.
struct VerifySettings {
  theory::ProblemConstants consts;
  /// Stepsize control parameter of a variable rule, if one was used.
  std::optional<double> eta;
  /// phi used by the inner distance bound; defaults to 2(1-eta)Q for variable
  /// rules and to the largest observed gamma^k otherwise.
  std::optional<double> lemma4_phi;
  /// false for Gauss-Newton curvature, where only the growth shape and the
  /// outer identity apply.
  bool exact_hessian = true;
  std::optional<double> C_gn;
  double ridge = 0.0;
  bool convergent = false;
  double tolerance = 1e-9;
};

struct VerifyReport {
  std::vector<BoundReport> bounds;
  std::optional<RateFit> grad_rate;
  std::optional<RateFit> dist_rate;

  bool any_violated() const {
    return std::any_of(bounds.begin(), bounds.end(),
                       [](const BoundReport& b) { return b.violated; });
  }
};

inline VerifyReport verify_all(const std::vector<CycleTrace>& traces,
                               const VerifySettings& s) {
  VerifyReport out;
  const auto& k = s.consts;
  out.bounds.push_back(check_outer_identity(traces));
  if (s.exact_hessian) {
    k.validate();
    out.bounds.push_back(
        check_hessian_growth(traces, k.c, k.C, k.m, s.tolerance));
    if (s.eta) {
      out.bounds.push_back(
          check_gamma_star(traces, *s.eta, k.Q(), s.tolerance));
    }
    double phi = 0.0;
    if (s.lemma4_phi) {
      phi = *s.lemma4_phi;
    } else if (s.eta) {
      phi = theory::phi(*s.eta, k.Q());
    } else {
      for (const auto& t : traces) phi = std::max(phi, t.gamma);
    }
    out.bounds.push_back(check_inner_distance(traces, k, phi, s.tolerance));
    out.bounds.push_back(check_delta_bound(traces, k.Q(), k.m, s.tolerance));
    out.bounds.push_back(
        check_gradient_error_bound(traces, k.Q(), k.m, s.tolerance));
    out.bounds.push_back(check_hessian_error_decay(traces, k.c, k.C, k.m,
                                                   s.convergent, s.tolerance));
  } else if (s.C_gn) {
    out.bounds.push_back(
        check_gn_curvature_growth(traces, *s.C_gn, k.m, s.ridge, s.tolerance));
  }

  std::vector<double> grads;
  std::vector<double> dists;
  for (const auto& t : traces) {
    grads.push_back(t.full_grad_norm);
    if (t.dist_to_opt) dists.push_back(*t.dist_to_opt);
  }
  if (grads.size() >= RateFitOptions{}.min_length) out.grad_rate = fit_rate(grads);
  if (dists.size() >= RateFitOptions{}.min_length) out.dist_rate = fit_rate(dists);
  return out;
}

}  // namespace inewton::diag

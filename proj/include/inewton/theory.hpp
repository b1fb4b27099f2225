#pragma once

#include "inewton/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace inewton::theory {

/// Problem-level constants entering the rate analysis.
struct ProblemConstants {
  double c = 1.0;
  double C = 1.0;
  std::size_t m = 2;
  std::optional<double> M;  ///< gradient growth constant

  double Q() const { return C / c; }

  void validate() const {
    require(c > 0.0, "constants: c must be > 0");
    require(C >= c, "constants: C must be >= c");
    require(m >= 2, "constants: m must be >= 2");
    if (M) require(*M > 0.0, "constants: M must be > 0");
  }

  double require_M() const {
    require(M.has_value(), "gradient growth constant M is not set");
    return *M;
  }
};

/// phi = 2 (1 - eta) Q, the bound on the normalized stepsize bound.
inline double phi(double eta, double Q) {
  require(eta > 0.0 && eta < 1.0, "phi: need 0 < eta < 1");
  require(Q >= 1.0, "phi: need Q >= 1");
  return 2.0 * (1.0 - eta) * Q;
}

struct BSequence {
  std::vector<double> B;  ///< B_1 .. B_m
  double total = 0.0;     ///< B(phi) = sum_{j=2..m} B_j
};

namespace detail {

inline BSequence b_recursion(double growth, const ProblemConstants& consts) {
  const double M = consts.require_M();
  const double increment =
      2.0 * M / (consts.c * static_cast<double>(consts.m));
  BSequence out;
  out.B.assign(consts.m, 0.0);
  for (std::size_t j = 1; j < consts.m; ++j) {
    out.B[j] = growth * out.B[j - 1] + increment;
    out.total += out.B[j];
  }
  return out;
}

}  // namespace detail

/// B_1 = 0, B_{j+1} = (1 + (2Q/m) phi) B_j + 2M/(cm).
inline BSequence B_sequence(double phi_value, const ProblemConstants& consts) {
  consts.validate();
  require(phi_value >= 0.0, "B_sequence: phi must be >= 0");
  const double growth =
      1.0 + 2.0 * consts.Q() / static_cast<double>(consts.m) * phi_value;
  return detail::b_recursion(growth, consts);
}

/// Cycle-dependent variant with growth factor 1 + (2Q/m) max(1/k, phi).
inline BSequence B_sequence_at(double phi_value, std::size_t k,
                               const ProblemConstants& consts) {
  consts.validate();
  require(k >= 1, "B_sequence_at: k must be >= 1");
  require(phi_value >= 0.0, "B_sequence_at: phi must be >= 0");
  const double rate = std::max(1.0 / static_cast<double>(k), phi_value);
  const double growth =
      1.0 + 2.0 * consts.Q() / static_cast<double>(consts.m) * rate;
  return detail::b_recursion(growth, consts);
}

inline double B_total(double phi_value, const ProblemConstants& consts) {
  return B_sequence(phi_value, consts).total;
}

/// inf over phi of B(phi), reached as phi -> 0: M (m - 1) / c.
inline double B_min(const ProblemConstants& consts) {
  consts.validate();
  return consts.require_M() * static_cast<double>(consts.m - 1) / consts.c;
}

/// sup over phi in (0, 2Q) of B(phi), evaluated at phi = 2Q.
inline double B_max(const ProblemConstants& consts) {
  return B_total(2.0 * consts.Q(), consts);
}

/// Whether phi B(phi) C < 1 (the hypothesis under which kappa is defined).
inline bool in_kappa_domain(double phi_value, const ProblemConstants& consts) {
  return phi_value > 0.0 &&
         phi_value * B_total(phi_value, consts) * consts.C < 1.0;
}

namespace detail {

// 1 / (2 B C / (1 - B C phi) + 1)
inline double bracket(double phi_value, const ProblemConstants& consts) {
  const double bc = B_total(phi_value, consts) * consts.C;
  return 1.0 / (2.0 * bc / (1.0 - bc * phi_value) + 1.0);
}

}  // namespace detail

/// kappa = phi / Q^2 * 1 / (2BC/(1 - BC phi) + 1), a lower bound on the
/// asymptotic normalized stepsize. nullopt outside phi B(phi) C < 1.
inline std::optional<double> kappa(double phi_value,
                                   const ProblemConstants& consts) {
  if (!in_kappa_domain(phi_value, consts)) return std::nullopt;
  const double Q = consts.Q();
  return phi_value / (Q * Q) * detail::bracket(phi_value, consts);
}

/// 1 - r_nu(phi) = phi nu/Q^3 * bracket - phi^2 Q B C, evaluated without the
/// cancellation of forming r_nu first. Meaningful when r_nu rounds to 1.
inline std::optional<double> rate_deficit_nu(double phi_value, double nu,
                                             const ProblemConstants& consts) {
  require(nu > 0.0 && nu < 1.0, "rate_deficit_nu: need 0 < nu < 1");
  if (phi_value == 0.0) return 0.0;
  if (!in_kappa_domain(phi_value, consts)) return std::nullopt;
  const double Q = consts.Q();
  const double bc = B_total(phi_value, consts) * consts.C;
  return phi_value * nu / (Q * Q * Q) * detail::bracket(phi_value, consts) -
         phi_value * phi_value * Q * bc;
}

/// r_nu(phi) = 1 - phi nu/Q^3 * bracket + phi^2 Q B C.
inline std::optional<double> r_nu(double phi_value, double nu,
                                  const ProblemConstants& consts) {
  const auto deficit = rate_deficit_nu(phi_value, nu, consts);
  if (!deficit) return std::nullopt;
  return 1.0 - *deficit;
}

/// 1 - r_hat_nu(phi) = phi nu/Q^2 * bracket - phi^2 B C, without cancellation.
inline std::optional<double> rate_deficit_hat_nu(
    double phi_value, double nu, const ProblemConstants& consts) {
  require(nu > 0.0 && nu < 1.0, "rate_deficit_hat_nu: need 0 < nu < 1");
  if (phi_value == 0.0) return 0.0;
  if (!in_kappa_domain(phi_value, consts)) return std::nullopt;
  const double Q = consts.Q();
  const double bc = B_total(phi_value, consts) * consts.C;
  return phi_value * nu / (Q * Q) * detail::bracket(phi_value, consts) -
         phi_value * phi_value * bc;
}

/// r_hat_nu(phi) = 1 - phi nu/Q^2 * bracket + phi^2 B C; the rate bound
/// under Hoelder continuous Hessians. r_hat_nu <= r_nu, equal iff Q = 1.
inline std::optional<double> r_hat_nu(double phi_value, double nu,
                                      const ProblemConstants& consts) {
  const auto deficit = rate_deficit_hat_nu(phi_value, nu, consts);
  if (!deficit) return std::nullopt;
  return 1.0 - *deficit;
}

/// The polynomials whose positivity on (0, phi_bar) is equivalent to
/// r_nu(phi) < 1 together with phi < min(1/Q, 1/(B(phi) C)).
struct RatePolynomials {
  double nu;
  ProblemConstants consts;

  double psi() const {
    const double Q = consts.Q();
    return nu / (Q * Q * Q * Q);
  }
  double p1(double x) const {
    const double u = B_total(x, consts) * consts.C * x;
    const double bc = B_total(x, consts) * consts.C;
    return u * u - (2.0 * bc + 1.0 + psi()) * u + psi();
  }
  double p2(double x) const { return x; }
  double p3(double x) const { return 1.0 / consts.Q() - x; }
  double p4(double x) const {
    return 1.0 - x * B_total(x, consts) * consts.C;
  }
};

struct PhiBarOptions {
  /// Scan step as a fraction of the scan interval (0, 2Q].
  double scan_fraction = 1e-4;
  /// Final bracket width of the bisection.
  double tolerance = 1e-14;
};

struct PhiBarResult {
  double value = 0.0;
  bool root_found = false;
  /// Which polynomial produced the root (1, 3 or 4); 0 when none was found.
  int limiting_polynomial = 0;
};

namespace detail {

// First sign change of f on (0, hi], scanning with step h. f(0+) > 0.
inline std::optional<double> first_root(const std::function<double(double)>& f,
                                        double hi, double h,
                                        double tolerance) {
  double left = 0.0;
  const auto steps = static_cast<std::size_t>(std::ceil(hi / h));
  for (std::size_t s = 1; s <= steps; ++s) {
    const double right = std::min(hi, static_cast<double>(s) * h);
    if (f(right) <= 0.0) {
      double a = left;
      double b = right;
      while (b - a > tolerance) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        if (f(mid) > 0.0) {
          a = mid;
        } else {
          b = mid;
        }
      }
      return 0.5 * (a + b);
    }
    left = right;
  }
  return std::nullopt;
}

}  // namespace detail

/// Largest phi_bar such that the linear-rate condition holds on (0, phi_bar):
/// the smallest positive root of p1, p3, p4 (p2 = phi has none), found by a
/// dense sign scan of (0, 2Q] followed by bisection.
inline PhiBarResult phi_bar(double nu, const ProblemConstants& consts,
                            const PhiBarOptions& options = {}) {
  require(nu > 0.0 && nu < 1.0, "phi_bar: need 0 < nu < 1");
  consts.validate();
  consts.require_M();
  require(options.scan_fraction > 0.0 && options.scan_fraction < 1.0,
          "phi_bar: scan_fraction must be in (0, 1)");
  const RatePolynomials poly{nu, consts};
  const double hi = 2.0 * consts.Q();
  const double h = hi * options.scan_fraction;

  PhiBarResult best;
  best.value = hi;
  const std::pair<int, std::function<double(double)>> candidates[] = {
      {1, [&](double x) { return poly.p1(x); }},
      {3, [&](double x) { return poly.p3(x); }},
      {4, [&](double x) { return poly.p4(x); }},
  };
  for (const auto& [index, f] : candidates) {
    if (auto root = detail::first_root(f, hi, h, options.tolerance)) {
      if (!best.root_found || *root < best.value) {
        best.value = *root;
        best.root_found = true;
        best.limiting_polynomial = index;
      }
    }
  }
  return best;
}

/// eta_min = 1 - phi_bar / (2Q); any eta in (eta_min, 1) gives phi < phi_bar.
inline double eta_threshold(double phi_bar_value, double Q) {
  require(Q >= 1.0, "eta_threshold: need Q >= 1");
  return std::max(0.0, 1.0 - phi_bar_value / (2.0 * Q));
}

inline double eta_threshold(double nu, const ProblemConstants& consts,
                            const PhiBarOptions& options = {}) {
  return eta_threshold(phi_bar(nu, consts, options).value, consts.Q());
}

/// Every constant of the rate analysis for one (constants, eta, nu) choice.
struct TheoryReport {
  ProblemConstants consts;
  double eta = 0.0;
  double nu = 0.0;
  double phi = 0.0;
  BSequence B;
  double B_min = 0.0;
  double B_max = 0.0;
  bool kappa_hypothesis = false;  ///< phi B(phi) C < 1
  std::optional<double> kappa;
  std::optional<double> r_nu;
  std::optional<double> r_hat_nu;
  PhiBarResult phi_bar;
  double eta_threshold = 0.0;
  bool linear_rate_condition = false;  ///< eta > eta_threshold
};

inline TheoryReport report(const ProblemConstants& consts, double eta,
                           double nu, const PhiBarOptions& options = {}) {
  consts.validate();
  TheoryReport r;
  r.consts = consts;
  r.eta = eta;
  r.nu = nu;
  r.phi = phi(eta, consts.Q());
  r.B = B_sequence(r.phi, consts);
  r.B_min = B_min(consts);
  r.B_max = B_max(consts);
  r.kappa_hypothesis = in_kappa_domain(r.phi, consts);
  r.kappa = kappa(r.phi, consts);
  r.r_nu = theory::r_nu(r.phi, nu, consts);
  r.r_hat_nu = theory::r_hat_nu(r.phi, nu, consts);
  r.phi_bar = theory::phi_bar(nu, consts, options);
  r.eta_threshold = theory::eta_threshold(r.phi_bar.value, consts.Q());
  r.linear_rate_condition = eta > r.eta_threshold;
  return r;
}

}  // namespace inewton::theory

#include "inewton/theory.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

namespace th = inewton::theory;
using Big = boost::multiprecision::cpp_dec_float_50;

th::ProblemConstants unit_constants() { return {1.0, 1.0, 2, 1.0}; }

// Independent high-precision evaluation of kappa: explicit recursion for B,
// then the bracket expression, all in 50-digit decimal arithmetic.
Big kappa_oracle(double phi, const th::ProblemConstants& k) {
  const Big c = k.c, C = k.C, M = *k.M, p = phi;
  const Big m = static_cast<unsigned>(k.m);
  const Big Q = C / c;
  Big b = 0, total = 0;
  for (std::size_t j = 2; j <= k.m; ++j) {
    b = (1 + 2 * Q / m * p) * b + 2 * M / (c * m);
    total += b;
  }
  const Big bc = total * C;
  return p / (Q * Q) / (2 * bc / (1 - bc * p) + 1);
}

th::ProblemConstants random_constants(std::mt19937_64& rng, std::size_t max_m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> md(2, max_m);
  const double c = 0.1 + 4.0 * u(rng);
  const double Q = 1.0 + 9.0 * u(rng);
  const std::size_t m = md(rng);
  const double M = (0.2 + 2.0 * u(rng)) * Q / static_cast<double>(m);
  return {c, Q * c, m, M};
}

TEST(Theory, Phi) {
  EXPECT_DOUBLE_EQ(th::phi(0.75, 4.0), 2.0);
  EXPECT_DOUBLE_EQ(th::phi(0.5, 1.0), 1.0);
  EXPECT_LT(th::phi(1.0 - 1e-12, 3.0), 1e-10);
  EXPECT_THROW(th::phi(1.0, 2.0), inewton::ArgumentError);
  EXPECT_THROW(th::phi(0.0, 2.0), inewton::ArgumentError);
  EXPECT_THROW(th::phi(0.5, 0.5), inewton::ArgumentError);
}

TEST(Theory, BSequenceTwoComponents) {
  for (double phi : {0.0, 0.3, 1.7}) {
    const auto B = th::B_sequence(phi, unit_constants());
    ASSERT_EQ(B.B.size(), 2u);
    EXPECT_DOUBLE_EQ(B.B[0], 0.0);
    EXPECT_DOUBLE_EQ(B.B[1], 1.0);
    EXPECT_DOUBLE_EQ(B.total, 1.0);
  }
}

TEST(Theory, BSequenceHandRecursion) {
  const th::ProblemConstants k{1.0, 1.0, 3, 1.0};
  const auto B = th::B_sequence(0.5, k);
  EXPECT_NEAR(B.B[1], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(B.B[2], 14.0 / 9.0, 1e-15);
  EXPECT_NEAR(B.total, 20.0 / 9.0, 1e-15);
}

TEST(Theory, BSequenceMatchesClosedForm) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto k = random_constants(rng, 50);
    const double phi = 2.0 * k.Q() * u(rng) + 1e-3;
    const auto B = th::B_sequence(phi, k);
    const double md = static_cast<double>(k.m);
    const double a = 2.0 * k.Q() * phi / md;
    for (std::size_t j = 1; j <= k.m; ++j) {
      const double closed = (2.0 * *k.M / (k.c * md)) *
                            (std::pow(1.0 + a, static_cast<double>(j - 1)) - 1.0) / a;
      EXPECT_NEAR(B.B[j - 1], closed, 1e-12 * std::max(1.0, std::abs(closed)));
    }
  }
}

TEST(Theory, BSequenceLimitAndMonotonicity) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto k = random_constants(rng, 30);
    const auto small = th::B_sequence(1e-12, k);
    EXPECT_NEAR(small.total, th::B_min(k), 1e-9 * th::B_min(k));
    const double md = static_cast<double>(k.m);
    for (std::size_t j = 1; j <= k.m; ++j) {
      EXPECT_NEAR(small.B[j - 1], 2.0 * *k.M / (k.c * md) * static_cast<double>(j - 1),
                  1e-9 * (1.0 + small.B[j - 1]));
    }
    double prev = 0.0;
    for (double phi = 0.0; phi <= 2.0 * k.Q(); phi += k.Q() / 10.0) {
      const auto B = th::B_sequence(phi, k);
      EXPECT_GE(B.total, prev);
      prev = B.total;
      for (std::size_t j = 1; j < k.m; ++j) EXPECT_GE(B.B[j], B.B[j - 1]);
    }
    EXPECT_NEAR(th::B_max(k), th::B_total(2.0 * k.Q(), k), 0.0);
  }
}

TEST(Theory, BSequenceCycleDependentGrowth) {
  const th::ProblemConstants k{1.0, 2.0, 4, 0.5};
  // max(1/k, phi) = 1/2 at k = 2, phi = 0.1.
  const auto early = th::B_sequence_at(0.1, 2, k);
  const auto same = th::B_sequence(0.5, k);
  EXPECT_EQ(early.B, same.B);
  const auto late = th::B_sequence_at(0.1, 100, k);
  EXPECT_EQ(late.B, th::B_sequence(0.1, k).B);
}

TEST(Theory, BSequenceNeedsM) {
  const th::ProblemConstants k{1.0, 1.0, 3, std::nullopt};
  EXPECT_THROW(th::B_sequence(0.1, k), inewton::ArgumentError);
  EXPECT_THROW(th::B_sequence(-0.1, unit_constants()), inewton::ArgumentError);
}

TEST(Theory, KappaDerivedValue) {
  const auto kappa = th::kappa(0.1, unit_constants());
  ASSERT_TRUE(kappa.has_value());
  EXPECT_NEAR(*kappa, 0.9 / 29.0, 1e-15);
  EXPECT_NEAR(*kappa, 0.0310344827586206896, 1e-12);
}

TEST(Theory, KappaLimitsAndDomain) {
  const auto k = unit_constants();
  EXPECT_LT(*th::kappa(1e-9, k), 1e-9);
  EXPECT_FALSE(th::kappa(0.0, k).has_value());
  // phi B C < 1 means phi < 1 here; kappa vanishes at the edge.
  EXPECT_LT(*th::kappa(1.0 - 1e-9, k), 1e-8);
  EXPECT_FALSE(th::kappa(1.0, k).has_value());
  EXPECT_FALSE(th::kappa(1.5, k).has_value());
}

TEST(Theory, KappaMatchesMultiprecisionOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    const auto k = random_constants(rng, 20);
    const double phi = 2.0 * k.Q() * u(rng) * u(rng);
    const auto kappa = th::kappa(phi, k);
    if (!kappa) continue;
    const Big oracle = kappa_oracle(phi, k);
    EXPECT_GT(*kappa, 0.0);
    EXPECT_NEAR(*kappa, oracle.convert_to<double>(), 1e-12 * *kappa);
    ++checked;
  }
}

TEST(Theory, RateDerivedValue) {
  const auto r = th::r_nu(0.1, 0.5, unit_constants());
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, 1.01 - 0.45 / 29.0, 1e-15);
  EXPECT_NEAR(*r, 0.994483, 1e-6);
  EXPECT_EQ(*th::r_nu(0.0, 0.5, unit_constants()), 1.0);
}

TEST(Theory, RateHatEqualsRateIffQIsOne) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto k = random_constants(rng, 10);
    if (trial % 5 == 0) k.C = k.c;
    const auto bar = th::phi_bar(0.5, k);
    for (int s = 1; s <= 100; ++s) {
      const double phi = bar.value * s / 101.0;
      const auto r = th::r_nu(phi, 0.5, k);
      const auto rh = th::r_hat_nu(phi, 0.5, k);
      ASSERT_TRUE(r && rh);
      if (k.Q() == 1.0) {
        EXPECT_DOUBLE_EQ(*r, *rh);
      } else {
        EXPECT_LT(*rh, *r);
      }
    }
  }
}

TEST(Theory, RateBelowOneBelowPhiBar) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = random_constants(rng, 12);
    const double nu = 0.1 + 0.8 * (trial % 7) / 7.0;
    const auto bar = th::phi_bar(nu, k);
    ASSERT_TRUE(bar.root_found);
    EXPECT_LE(bar.value, 1.0 / k.Q() + 1e-14);
    EXPECT_LE(bar.value * th::B_total(bar.value, k) * k.C, 1.0 + 1e-12);
    for (int s = 1; s <= 1000; ++s) {
      const double phi = bar.value * s / 1001.0;
      const auto r = th::r_nu(phi, nu, k);
      ASSERT_TRUE(r.has_value());
      EXPECT_LE(*r, 1.0);
      const auto deficit = th::rate_deficit_nu(phi, nu, k);
      ASSERT_TRUE(deficit.has_value());
      EXPECT_GT(*deficit, 0.0) << "phi=" << phi << " Q=" << k.Q();
    }
  }
}

TEST(Theory, PhiBarMatchesQuadraticFormulaForTwoComponents) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    auto k = random_constants(rng, 2);
    k.m = 2;
    const double nu = 0.5;
    const double bc = th::B_total(0.0, k) * k.C;  // constant in phi for m = 2
    const double psi = nu / std::pow(k.Q(), 4);
    // p1 = bc^2 phi^2 - (2bc + 1 + psi) bc phi + psi.
    const double a = bc * bc, b = -(2.0 * bc + 1.0 + psi) * bc, c = psi;
    const double root = (-b - std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
    const double expected = std::min({root, 1.0 / k.Q(), 1.0 / bc});
    const auto bar = th::phi_bar(nu, k);
    EXPECT_NEAR(bar.value, expected, 1e-12);
  }
}

TEST(Theory, PhiBarDerivedValue) {
  // m = 2, Q = 1, B C = 1, psi = 0.5: phi^2 - 3.5 phi + 0.5 = 0.
  const auto bar = th::phi_bar(0.5, unit_constants());
  EXPECT_NEAR(bar.value, (3.5 - std::sqrt(10.25)) / 2.0, 1e-13);
  EXPECT_EQ(bar.limiting_polynomial, 1);
}

TEST(Theory, EtaThreshold) {
  EXPECT_DOUBLE_EQ(th::eta_threshold(4.0, 2.0), 0.0);
  EXPECT_NEAR(th::eta_threshold(1e-12, 2.0), 1.0, 1e-11);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = random_constants(rng, 10);
    const auto bar = th::phi_bar(0.5, k);
    const double eta_min = th::eta_threshold(0.5, k);
    EXPECT_NEAR(eta_min, 1.0 - bar.value / (2.0 * k.Q()), 1e-15);
    EXPECT_LT(th::phi(std::min(eta_min + 1e-6, 1.0 - 1e-12), k.Q()), bar.value);
  }
}

TEST(Theory, ReportCollectsEverything) {
  const auto r = th::report(unit_constants(), 0.95, 0.5);
  EXPECT_NEAR(r.phi, 0.1, 1e-15);
  EXPECT_TRUE(r.kappa_hypothesis);
  EXPECT_NEAR(*r.kappa, 0.9 / 29.0, 1e-15);
  EXPECT_NEAR(*r.r_nu, *r.r_hat_nu, 0.0);
  EXPECT_DOUBLE_EQ(r.B_min, 1.0);
  EXPECT_DOUBLE_EQ(r.B_max, 1.0);
  EXPECT_TRUE(r.linear_rate_condition);
  EXPECT_FALSE(th::report(unit_constants(), 0.5, 0.5).linear_rate_condition);
}

}  // namespace

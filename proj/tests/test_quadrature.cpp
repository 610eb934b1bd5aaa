#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "heatlab/quadrature.hpp"

using namespace heatlab;

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n : {2, 5, 8, 16}) {
    const auto rule = quad::gauss_legendre(n);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += rule.weights[i] * std::pow(rule.nodes[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      EXPECT_NEAR(acc, exact, 1e-13) << "n=" << n << " deg=" << deg;
    }
  }
}

TEST(GaussLegendre, CachedRuleMatchesFreshRule) {
  const auto& a = quad::gauss_legendre_cached<8>();
  const auto b = quad::gauss_legendre(8);
  for (int i = 0; i < 8; ++i) {
    EXPECT_DOUBLE_EQ(a.nodes[i], b.nodes[i]);
    EXPECT_DOUBLE_EQ(a.weights[i], b.weights[i]);
  }
}

TEST(AdaptiveIntegrate, ClosedFormIntegrals) {
  EXPECT_NEAR(quad::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi).value, 2.0, 1e-12);
  EXPECT_NEAR(quad::integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0).value, 2.0 / 3.0, 1e-10);
  EXPECT_NEAR(quad::integrate([](double x) { return std::exp(x); }, -1.0, 2.0).value,
              std::exp(2.0) - std::exp(-1.0), 1e-11);
  EXPECT_NEAR(quad::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0).value, 2.0, 1e-7);
}

TEST(TailIntegral, ConvergentPowerLaws) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> k_dist(-4.0, -1.2), lo_dist(0.5, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double k = k_dist(rng), lo = lo_dist(rng);
    const auto res = quad::integrate_to_infinity([&](double s) { return std::pow(s, k); }, lo);
    ASSERT_TRUE(res.converged) << k;
    const double exact = std::pow(lo, k + 1.0) / (-(k + 1.0));
    EXPECT_NEAR(res.value / exact, 1.0, 1e-8) << "k=" << k;
    EXPECT_NEAR(res.tail_exponent, k, 1e-8);
  }
}

TEST(TailIntegral, DivergentAndBoundaryCases) {
  EXPECT_FALSE(quad::integrate_to_infinity([](double s) { return 1.0 / s; }, 1.0).converged);
  EXPECT_FALSE(quad::integrate_to_infinity([](double s) { return std::pow(s, -1.02); }, 1.0).converged);
  EXPECT_FALSE(quad::integrate_to_infinity([](double s) { return std::log(s) / s; }, 2.0).converged);
  EXPECT_FALSE(quad::integrate_to_infinity([](double s) { return std::exp(s); }, 1.0).converged);
  // 1/(s log^2 s) converges; its local exponent -1 - 2/log s is already below -1.05 at s = 10^12.
  EXPECT_TRUE(
      quad::integrate_to_infinity([](double s) { return 1.0 / (s * std::log(s) * std::log(s)); }, 2.0).converged);
}

TEST(TailIntegral, UnderflowingIntegrand) {
  const auto res = quad::integrate_to_infinity([](double s) { return std::exp(-s); }, 1.0);
  ASSERT_TRUE(res.converged);
  EXPECT_NEAR(res.value, std::exp(-1.0), 1e-11);
}

TEST(TailIntegral, RejectsNonPositiveLowerLimit) {
  EXPECT_THROW(quad::integrate_to_infinity([](double) { return 1.0; }, 0.0), std::invalid_argument);
}

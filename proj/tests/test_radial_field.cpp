#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "heatlab/radial_field.hpp"

using namespace heatlab;

TEST(RadialGrid, GradedNodesAndLocate) {
  const RadialGrid g(3, 8.0, 128);
  EXPECT_EQ(g.size(), 128);
  EXPECT_DOUBLE_EQ(g.nodes().back(), 8.0);
  EXPECT_NEAR(g[63], 1.0, 1e-14);  // a = R/8 lands on node M/2 for grade 3
  for (int i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  EXPECT_EQ(g.locate(0.0), -1);
  EXPECT_EQ(g.locate(g[10]), 10);
  EXPECT_EQ(g.locate(0.5 * (g[10] + g[11])), 10);
  EXPECT_THROW(RadialGrid(4, 1.0, 10), std::invalid_argument);
  EXPECT_THROW(RadialGrid(3, -1.0, 10), std::invalid_argument);
}

TEST(SphereArea, KnownValues) {
  EXPECT_DOUBLE_EQ(sphere_area(1), 2.0);
  EXPECT_NEAR(sphere_area(2), 2.0 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(sphere_area(3), 4.0 * std::numbers::pi, 1e-14);
}

TEST(RadialFunction, Validation) {
  const auto g = RadialGrid::make(3, 4.0, 32);
  EXPECT_THROW(RadialFunction(g, std::vector<double>(31, 0.0)), std::invalid_argument);
  std::vector<double> bad(32, 0.0);
  bad[3] = std::nan("");
  EXPECT_THROW(RadialFunction(g, bad), std::invalid_argument);
  EXPECT_THROW(RadialFunction(g, std::vector<double>(32, 1.0), 3.0), std::invalid_argument);
  EXPECT_THROW(RadialFunction(g, std::vector<double>(32, 1.0), 0.0, 5.0), std::invalid_argument);
  const RadialFunction f(g, std::vector<double>(32, 1.0), 0.0, 2.0);
  for (int i = 0; i < 32; ++i) EXPECT_EQ(f[i], (*g)[i] > 2.0 ? 0.0 : 1.0);
}

TEST(RadialFunction, InterpolationReproducesPowerData) {
  const auto g = RadialGrid::make(3, 8.0, 64);
  const double gamma = 1.3;
  const auto f = RadialFunction::sample(g, [&](double s) { return 5.0 * std::pow(s, -gamma); }, gamma);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-12.0, std::log(8.0));
  for (int i = 0; i < 200; ++i) {
    const double s = std::exp(u(rng));
    EXPECT_NEAR(f.at(s) / (5.0 * std::pow(s, -gamma)), 1.0, 1e-12) << s;
  }
}

TEST(RadialFunction, InterpolationOfSmoothDataConverges) {
  double prev = 1.0;
  for (int M : {64, 128, 256}) {
    const auto g = RadialGrid::make(2, 6.0, M);
    const auto f = RadialFunction::sample(g, [](double s) { return std::cos(s); });
    double err = 0.0;
    for (int k = 1; k < 600; ++k) err = std::max(err, std::abs(f.at(0.01 * k) - std::cos(0.01 * k)));
    EXPECT_LT(err, prev / 3.0);
    prev = err;
  }
}

TEST(RadialNorm, GaussianClosedForms) {
  // ||e^{-|x|^2}||_p^p = (pi/p)^{N/2}.
  for (int N = 1; N <= 3; ++N) {
    const auto g = RadialGrid::make(N, 8.0, 1024);
    const auto f = RadialFunction::sample(g, [](double s) { return std::exp(-s * s); });
    for (double p : {1.0, 1.5, 2.0, 4.0}) {
      const double exact = std::pow(std::pow(std::numbers::pi / p, 0.5 * N), 1.0 / p);
      EXPECT_NEAR(radial_norm(f, p) / exact, 1.0, 5e-5) << "N=" << N << " p=" << p;
    }
    EXPECT_NEAR(radial_norm(f, kInf), 1.0, 1e-9);
  }
}

TEST(RadialNorm, SecondOrderInGridSpacing) {
  // Norm of the interpolant converges like M^-2.
  const double exact = std::pow(std::numbers::pi / 2.0, 0.75);
  std::vector<double> err;
  for (int M : {128, 256, 512}) {
    const auto f = RadialFunction::sample(RadialGrid::make(3, 8.0, M), [](double s) { return std::exp(-s * s); });
    err.push_back(std::abs(radial_norm(f, 2.0) - exact));
  }
  EXPECT_NEAR(err[0] / err[1], 4.0, 0.4);
  EXPECT_NEAR(err[1] / err[2], 4.0, 0.4);
}

TEST(RadialNorm, SingularPowerDataClosedForm) {
  // || |x|^-gamma chi_1 ||_p^p = sigma_{N-1} / (N - gamma p), gamma p < N.
  for (int N = 1; N <= 3; ++N) {
    const auto g = RadialGrid::make(N, 8.0, 256);
    for (double gamma : {0.2, 0.45 * N}) {
      const auto f = RadialFunction::sample(
          g, [&](double s) { return s <= 1.0 ? std::pow(s, -gamma) : 0.0; }, gamma, 1.0);
      for (double p : {1.0, 1.5, 2.0}) {
        if (gamma * p >= N) continue;
        const double exact = std::pow(sphere_area(N) / (N - gamma * p), 1.0 / p);
        EXPECT_NEAR(radial_norm(f, p) / exact, 1.0, 1e-9) << "N=" << N << " gamma=" << gamma << " p=" << p;
      }
      EXPECT_TRUE(std::isinf(radial_norm(f, kInf)));
    }
  }
}

TEST(RadialNorm, HomogeneityAndTriangleInequality) {
  const auto g = RadialGrid::make(3, 6.0, 256);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double a1 = c(rng), a2 = c(rng), b1 = c(rng), b2 = c(rng);
    const auto f = RadialFunction::sample(g, [&](double s) { return a1 * std::exp(-s * s) + a2 * std::sin(s); });
    const auto h = RadialFunction::sample(g, [&](double s) { return b1 / (1.0 + s * s) + b2 * std::exp(-s); });
    std::vector<double> sum(g->size());
    for (int i = 0; i < g->size(); ++i) sum[i] = f[i] + h[i];
    const RadialFunction fh(g, sum);
    for (double p : {1.0, 2.0, 3.0, kInf}) {
      EXPECT_LE(radial_norm(fh, p), radial_norm(f, p) + radial_norm(h, p) + 1e-12);
      EXPECT_NEAR(radial_norm(f.scaled(-3.0), p), 3.0 * radial_norm(f, p), 1e-11 * (1.0 + radial_norm(f, p)));
    }
  }
}

TEST(ProblemSpec, ValidationAndSingularData) {
  ProblemSpec s;
  EXPECT_NO_THROW(s.validate());
  s.rho = 3.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.rho = 0.5;
  s.r = 0.5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.r = 2.0;
  s.K = 4.0;
  const auto grid = default_grid(s, 256);
  EXPECT_DOUBLE_EQ(grid->max_radius(), 8.0);
  const auto u0 = build_singular_data(s, grid);
  EXPECT_DOUBLE_EQ(u0.singular_power(), 0.25);
  EXPECT_NEAR(u0.at(0.5), 2.0 * std::pow(0.5, -0.25), 1e-12);
  EXPECT_EQ(u0.at(1.5), 0.0);
}

TEST(ClassMembership, PowerDataWitnesses) {
  ProblemSpec s;
  s.rho = 1.2;
  s.K = 3.0;
  const auto grid = default_grid(s, 256);
  const auto u0 = build_singular_data(s, grid);
  const auto m = class_membership(u0, s.rho, s.r);
  ASSERT_TRUE(m.upper.member);
  ASSERT_TRUE(m.lower.member);
  EXPECT_NEAR(m.upper.K, 3.0, 1e-12);
  EXPECT_NEAR(m.lower.K, 3.0, 1e-12);
  EXPECT_NEAR(m.upper.a, 1.0, 1e-12);
  // Weaker singularity: in the upper class, not the lower one.
  const auto mild = RadialFunction::sample(
      grid, [](double s) { return s <= 1.0 ? std::pow(s, -0.5) : 0.0; }, 0.5, 1.0);
  const auto mm = class_membership(mild, 1.2, 1.0);
  EXPECT_TRUE(mm.upper.member);
  EXPECT_FALSE(mm.lower.member);
  EXPECT_THROW(class_membership(u0.scaled(-1.0), 1.2, 1.0), std::invalid_argument);
}

TEST(Csv, RoundTrip) {
  const auto g = RadialGrid::make(2, 4.0, 50);
  const auto f = RadialFunction::sample(
      g, [](double s) { return s <= 1.0 ? std::pow(s, -0.7) : 0.0; }, 0.7, 1.0);
  std::stringstream ss;
  write_csv(ss, f);
  const auto h = read_csv(ss);
  EXPECT_EQ(h.grid().dimension(), 2);
  EXPECT_DOUBLE_EQ(h.singular_power(), 0.7);
  ASSERT_TRUE(h.support_radius());
  EXPECT_DOUBLE_EQ(*h.support_radius(), 1.0);
  for (int i = 0; i < f.size(); ++i) EXPECT_DOUBLE_EQ(f[i], h[i]);
  std::stringstream bad("radius,value\n1,2\n");
  EXPECT_THROW(read_csv(bad), std::invalid_argument);
}

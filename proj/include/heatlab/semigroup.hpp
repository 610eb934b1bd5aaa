#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "heatlab/quadrature.hpp"
#include "heatlab/radial_field.hpp"

namespace heatlab {

using json = nlohmann::json;

/// Result of one estimate check.
struct CheckRecord {
  std::string check;
  json params = json::object();
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool pass = false;

  json to_json() const {
    return {{"check", check}, {"params", params}, {"lhs", lhs}, {"rhs", rhs}, {"ratio", ratio}, {"pass", pass}};
  }
};

// ---------------------------------------------------------------------------
// Free-space radial heat kernel

/// e^{-z} I_0(z) for z >= 0: power series below 15, asymptotic series above.
inline double bessel_i0e(double z) {
  if (z < 15.0) {
    const double q = 0.25 * z * z;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 80 && term > 1e-17 * sum; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
    }
    return sum * std::exp(-z);
  }
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 30; ++k) {
    term *= (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * z);
    sum += term;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

/// Radial reduction of the Gauss-Weierstrass kernel:
/// S(t)f(s) = \int_0^inf rho^(N-1) k(s, rho, t) f(rho) d rho.
class FreeKernel {
 public:
  /// `angular` replaces the closed forms (N = 2, 3) by Q-point Gauss-Legendre
  /// over the polar angle with weight sin^(N-2).
  /// `scale` multiplies the kernel; anything but 1 is a deliberate fault.
  explicit FreeKernel(int N, bool angular = false, int Q = 128, double scale = 1.0)
      : N_(N), angular_(angular && N > 1), scale_(scale) {
    if (N < 1 || N > 3) throw std::invalid_argument("FreeKernel: N must be 1, 2 or 3");
    if (angular_) {
      if (Q < 64) throw std::invalid_argument("FreeKernel: angular order must be >= 64");
      const auto rule = quad::gauss_legendre(Q);
      for (int i = 0; i < Q; ++i) {
        const double theta = 0.5 * std::numbers::pi * (1.0 + rule.nodes[i]);
        const double w = 0.5 * std::numbers::pi * rule.weights[i] * std::pow(std::sin(theta), N - 2);
        one_minus_cos_.push_back(1.0 - std::cos(theta));
        angular_weights_.push_back(w);
      }
      sphere_ = sphere_area(N - 1);
    }
  }

  int dimension() const { return N_; }

  double operator()(double s, double rho, double t) const { return scale_ * unscaled(s, rho, t); }

 private:
  double unscaled(double s, double rho, double t) const {
    const double d = s - rho;
    const double gauss = std::exp(-d * d / (4.0 * t));
    if (N_ == 1) {
      const double e = s + rho;
      return (gauss + std::exp(-e * e / (4.0 * t))) / std::sqrt(4.0 * std::numbers::pi * t);
    }
    if (angular_) {
      double acc = 0.0;
      const double c = s * rho / (2.0 * t);
      for (std::size_t i = 0; i < angular_weights_.size(); ++i)
        acc += angular_weights_[i] * std::exp(-c * one_minus_cos_[i]);
      return sphere_ * std::pow(4.0 * std::numbers::pi * t, -0.5 * N_) * gauss * acc;
    }
    if (N_ == 2) return gauss * bessel_i0e(s * rho / (2.0 * t)) / (2.0 * t);
    const double x = s * rho / t;
    const double shell = x < 1e-300 ? 1.0 / t : -std::expm1(-x) / (s * rho);
    return gauss * shell / std::sqrt(4.0 * std::numbers::pi * t);
  }

  int N_;
  bool angular_;
  double scale_;
  double sphere_ = 0.0;
  std::vector<double> one_minus_cos_, angular_weights_;
};

/// Sparse linear map from reduced nodal values w_j to values at target radii.
/// Row i holds contiguous weights starting at source index first[i].
class HeatOperator {
 public:
  std::vector<int> first;
  std::vector<std::vector<double>> weights;

  std::size_t rows() const { return first.size(); }

  std::vector<double> apply(const std::vector<double>& w) const {
    std::vector<double> out(first.size(), 0.0);
    for (std::size_t i = 0; i < first.size(); ++i) {
      const auto& row = weights[i];
      const double* src = w.data() + first[i];
      double acc = 0.0;
      for (std::size_t k = 0; k < row.size(); ++k) acc += row[k] * src[k];
      out[i] = acc;
    }
    return out;
  }

  /// Sum of row i: the discrete kernel mass seen by target i.
  double row_mass(std::size_t i) const {
    double m = 0.0;
    for (double x : weights[i]) m += x;
    return m;
  }
};

namespace detail {

// \int_a^b kernel(s, rho) rho^alpha [basis] d rho on pieces no wider than
// `width` and with radius ratio <= 1.5, accumulating the two hat moments.
struct HatMoments {
  double left = 0.0, right = 0.0;
};

inline HatMoments hat_integral(const FreeKernel& k, double s, double t, double alpha, double a, double b,
                               double x0, double x1, double width) {
  const auto& rule = quad::gauss_legendre_cached<8>();
  const int by_width = static_cast<int>(std::ceil((b - a) / width));
  const int by_ratio = static_cast<int>(std::ceil((b - a) / (0.5 * a)));
  const int m = std::clamp(std::max(by_width, by_ratio), 1, 100000);
  const double step = (b - a) / m;
  HatMoments out;
  const double inv = 1.0 / (x1 - x0);
  for (int p = 0; p < m; ++p) {
    const double lo = a + p * step;
    const double mid = lo + 0.5 * step, half = 0.5 * step;
    for (int q = 0; q < 8; ++q) {
      const double rho = mid + half * rule.nodes[q];
      const double v = rule.weights[q] * half * k(s, rho, t) * std::pow(rho, alpha);
      const double lam = (rho - x0) * inv;
      out.left += v * (1.0 - lam);
      out.right += v * lam;
    }
  }
  return out;
}

inline double plain_integral(const FreeKernel& k, double s, double t, double alpha, double a, double b,
                             double width) {
  const auto& rule = quad::gauss_legendre_cached<8>();
  const int m = std::clamp(static_cast<int>(std::ceil((b - a) / width)), 1, 100000);
  const double step = (b - a) / m;
  double acc = 0.0;
  for (int p = 0; p < m; ++p) {
    const double mid = a + (p + 0.5) * step, half = 0.5 * step;
    for (int q = 0; q < 8; ++q) {
      const double rho = mid + half * rule.nodes[q];
      acc += rule.weights[q] * half * k(s, rho, t) * std::pow(rho, alpha);
    }
  }
  return acc;
}

// \int_0^b kernel(s, rho) rho^alpha d rho, alpha > -1: dyadic pieces towards
// the origin, the innermost one with the kernel frozen at rho -> 0.
inline double origin_integral(const FreeKernel& k, double s, double t, double alpha, double b) {
  const auto& rule = quad::gauss_legendre_cached<8>();
  double acc = 0.0;
  double hi = b;
  for (int level = 0; level < 48; ++level) {
    const double lo = 0.5 * hi;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int q = 0; q < 8; ++q) {
      const double rho = mid + half * rule.nodes[q];
      acc += rule.weights[q] * half * k(s, rho, t) * std::pow(rho, alpha);
    }
    hi = lo;
  }
  acc += k(s, 0.5 * hi, t) * std::pow(hi, alpha + 1.0) / (alpha + 1.0);
  return acc;
}

}  // namespace detail

/// Product-integration weights for the free-space semigroup.
///
/// The source profile is rho^-gamma times the hat interpolant of w_j on
/// `src` (w_1 constant on (0, r_1]) and vanishes past `edge`. Contributions
/// with (s - rho)^2 / 4t > 60 are dropped. All weights are nonnegative.
inline HeatOperator build_free_operator(const FreeKernel& kernel, const RadialGrid& src,
                                        const std::vector<double>& targets, double t, double gamma,
                                        double edge) {
  if (!(t > 0.0)) throw std::invalid_argument("build_free_operator: t must be > 0");
  const auto& r = src.nodes();
  const int M = src.size();
  const int N = src.dimension();
  const double alpha = N - 1.0 - gamma;
  const double reach = std::sqrt(240.0 * t);
  const double width = std::sqrt(t);
  edge = std::min(edge, src.max_radius());
  HeatOperator op;
  op.first.resize(targets.size());
  op.weights.resize(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double s = targets[i];
    const double lo = std::max(0.0, s - reach), hi = std::min(edge, s + reach);
    if (lo >= edge || hi <= 0.0) {
      op.first[i] = 0;
      continue;
    }
    const int jlo = std::max(0, src.locate(lo));
    int jhi = std::min(M - 1, src.locate(hi) + 1);
    const int first = (lo < r[0]) ? 0 : jlo;
    std::vector<double> row(jhi - first + 1, 0.0);
    if (lo < r[0]) {
      // (0, r_1]: profile w_1 rho^-gamma.
      const int m0 = std::max(1, static_cast<int>(std::ceil(r[0] / width)));
      const double b = r[0] / m0;
      double acc = detail::origin_integral(kernel, s, t, alpha, b);
      if (m0 > 1) acc += detail::plain_integral(kernel, s, t, alpha, b, r[0], width);
      row[0] += acc;
    }
    for (int j = jlo; j + 1 < M && j < jhi; ++j) {
      if (r[j] >= edge) break;
      // Integrate only the part of the cell inside the cutoff window.
      const double a = std::max(r[j], lo);
      if (r[j + 1] > edge) {
        if (a < edge) row[j - first] += detail::plain_integral(kernel, s, t, alpha, a, edge, width);
        break;
      }
      const double b = std::min(r[j + 1], hi);
      if (!(b > a)) continue;
      const auto mom = detail::hat_integral(kernel, s, t, alpha, a, b, r[j], r[j + 1], width);
      row[j - first] += mom.left;
      row[j + 1 - first] += mom.right;
    }
    while (!row.empty() && row.back() == 0.0) row.pop_back();
    op.first[i] = first;
    op.weights[i] = std::move(row);
  }
  return op;
}

// ---------------------------------------------------------------------------
// Dirichlet ball: radial finite volumes + Crank-Nicolson

/// Radial heat operator on a uniform ball grid r_i = i R / M, with cells
/// bounded by node midpoints (the first cell starts at the origin, where the
/// flux vanishes) and u(R) = 0.
class BallStepper {
 public:
  BallStepper(int N, double R, int M) : N_(N), M_(M), h_(R / M) {
    const int n = M - 1;  // unknowns: nodes 1..M-1
    lower_.assign(n, 0.0);
    upper_.assign(n, 0.0);
    diag_.assign(n, 0.0);
    double max_rate = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f_in = i == 0 ? 0.0 : (i + 0.5) * h_;
      const double f_out = (i + 1.5) * h_;
      const double vol = (std::pow(f_out, N) - std::pow(f_in, N)) / N;
      const double c_in = i == 0 ? 0.0 : std::pow(f_in, N - 1) / h_;
      const double c_out = std::pow(f_out, N - 1) / h_;
      lower_[i] = c_in / vol;
      upper_[i] = c_out / vol;
      diag_[i] = -(c_in + c_out) / vol;
      max_rate = std::max(max_rate, -diag_[i]);
    }
    // (I + dt/2 A) keeps a nonnegative diagonal, so every step is positive.
    dt_max_ = 2.0 / max_rate;
  }

  double max_step() const { return dt_max_; }
  double spacing() const { return h_; }

  /// Advances node values (size M, last entry forced to 0) by time t.
  void advance(std::vector<double>& u, double t) const {
    if (t <= 0.0) return;
    const int steps = static_cast<int>(std::ceil(t / dt_max_ * (1.0 - 1e-12)));
    const double dt = t / std::max(steps, 1);
    const int n = M_ - 1;
    // Factor (I - dt/2 A) once.
    std::vector<double> cp(n), denom(n);
    for (int i = 0; i < n; ++i) {
      const double a = -0.5 * dt * lower_[i];
      const double b = 1.0 - 0.5 * dt * diag_[i];
      const double c = -0.5 * dt * upper_[i];
      denom[i] = b - (i > 0 ? a * cp[i - 1] : 0.0);
      cp[i] = c / denom[i];
    }
    std::vector<double> rhs(n);
    u.back() = 0.0;
    for (int step = 0; step < std::max(steps, 1); ++step) {
      for (int i = 0; i < n; ++i) {
        const double left = i > 0 ? u[i - 1] : 0.0;
        rhs[i] = u[i] + 0.5 * dt * (lower_[i] * left + diag_[i] * u[i] + upper_[i] * u[i + 1]);
      }
      for (int i = 0; i < n; ++i) {
        const double a = -0.5 * dt * lower_[i];
        rhs[i] = (rhs[i] - (i > 0 ? a * rhs[i - 1] : 0.0)) / denom[i];
      }
      for (int i = n - 2; i >= 0; --i) rhs[i] -= cp[i] * rhs[i + 1];
      for (int i = 0; i < n; ++i) u[i] = rhs[i];
      u.back() = 0.0;
    }
  }

 private:
  int N_, M_;
  double h_;
  double dt_max_ = 0.0;
  std::vector<double> lower_, upper_, diag_;
};

/// s^(N-1)-weighted cell averages of f over the ball cells of `grid`.
inline std::vector<double> ball_cell_averages(const RadialFunction& f, const RadialGrid& grid) {
  const auto& rule = quad::gauss_legendre_cached<8>();
  const int N = grid.dimension();
  const int M = grid.size();
  const double h = grid.max_radius() / M;
  const double gamma = f.singular_power();
  std::vector<double> out(M, 0.0);
  auto piece = [&](double a, double b) {
    if (b <= a) return 0.0;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int q = 0; q < 8; ++q) {
      const double s = mid + half * rule.nodes[q];
      acc += rule.weights[q] * f.at(s) * std::pow(s, N - 1);
    }
    return acc * half;
  };
  const double fr1 = f.grid()[0];
  for (int i = 0; i + 1 < M; ++i) {
    const double node = (i + 1) * h;
    const double lo = i == 0 ? 0.0 : node - 0.5 * h;
    const double hi = node + 0.5 * h;
    double acc = 0.0;
    // Break at the node, at the support edge and at the source's first node.
    std::vector<double> cuts{lo, node, hi};
    if (f.support_radius()) cuts.push_back(*f.support_radius());
    cuts.push_back(fr1);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double a = std::max(cuts[c], lo), b = std::min(cuts[c + 1], hi);
      if (b <= a) continue;
      if (a == 0.0) {
        // Near the origin the source is v_1 (s/r_1)^-gamma on (0, r_1].
        const double top = std::min(b, fr1);
        acc += f[0] * std::pow(fr1, gamma) * std::pow(top, N - gamma) / (N - gamma);
        acc += piece(top, b);
        continue;
      }
      // Geometric refinement keeps the rule accurate for singular profiles.
      if (gamma > 0.0 && b / a > 1.5) {
        const int m = static_cast<int>(std::ceil(std::log(b / a) / std::log(1.5)));
        const double ratio = std::pow(b / a, 1.0 / m);
        double x = a;
        for (int k = 0; k < m; ++k) {
          const double y = k + 1 == m ? b : x * ratio;
          acc += piece(x, y);
          x = y;
        }
      } else {
        acc += piece(a, b);
      }
    }
    const double vol = (std::pow(hi, N) - std::pow(lo, N)) / N;
    out[i] = acc / vol;
  }
  out.back() = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Engines

enum class EngineKind { free_space, dirichlet_ball };

struct EngineOptions {
  bool angular_quadrature = false;  ///< free space: angular rule instead of closed forms
  int angular_order = 128;          ///< Q, >= 64
  bool richardson = false;          ///< ball: combine h and h/2 as (4 u_{h/2} - u_h) / 3
  double startup_steps = 10.0;      ///< ball: singular data start with a free-space step of this many dt
  double kernel_scale = 1.0;        ///< fault-injection hook for test suites; 1 is the heat kernel
};

/// Heat semigroup on radial data: exact free-space convolution by product
/// integration, or Crank-Nicolson finite volumes in a Dirichlet ball.
class SemigroupEngine {
 public:
  /// Free space on a (typically graded) grid; the grid radius is the truncation radius.
  static SemigroupEngine free_space(GridPtr grid, EngineOptions opt = {}) {
    SemigroupEngine e;
    e.kind_ = EngineKind::free_space;
    e.grid_ = std::move(grid);
    e.opt_ = opt;
    e.state_ = std::make_shared<State>(
        FreeKernel(e.grid_->dimension(), opt.angular_quadrature, opt.angular_order, opt.kernel_scale));
    return e;
  }

  /// Dirichlet ball of radius R with M uniform nodes.
  static SemigroupEngine dirichlet_ball(int N, double R, int M, EngineOptions opt = {}) {
    SemigroupEngine e;
    e.kind_ = EngineKind::dirichlet_ball;
    e.grid_ = RadialGrid::make(N, R, M, 1.0);
    e.opt_ = opt;
    e.state_ = std::make_shared<State>(FreeKernel(N, false, 128, opt.kernel_scale));
    e.state_->stepper = std::make_shared<BallStepper>(N, R, M);
    if (opt.richardson) {
      e.state_->fine_grid = RadialGrid::make(N, R, 2 * M, 1.0);
      e.state_->fine_stepper = std::make_shared<BallStepper>(N, R, 2 * M);
    }
    return e;
  }

  EngineKind kind() const { return kind_; }
  const GridPtr& grid() const { return grid_; }
  int dimension() const { return grid_->dimension(); }
  const EngineOptions& options() const { return opt_; }
  const FreeKernel& kernel() const { return state_->kernel; }

  /// Largest Crank-Nicolson step (ball engine).
  double max_time_step() const { return state_->stepper ? state_->stepper->max_step() : 0.0; }

  /// S(t) f for f on the engine grid; the result is regular (singular power 0).
  RadialFunction apply(const RadialFunction& f, double t) const {
    if (!(t > 0.0)) throw std::invalid_argument("heat_apply: t must be > 0");
    if (f.grid_ptr() != grid_ && !f.grid().same_as(*grid_))
      throw std::invalid_argument("heat_apply: function is not on the engine grid");
    if (kind_ == EngineKind::free_space) {
      const auto op = free_operator(t, f.singular_power(), f.outer_radius());
      return RadialFunction(grid_, op->apply(f.reduced_values()));
    }
    auto u = ball_run(f, *grid_, *state_->stepper, t);
    if (opt_.richardson) {
      const auto fine = ball_run(f, *state_->fine_grid, *state_->fine_stepper, t);
      for (std::size_t i = 0; i < u.size(); ++i) u[i] = (4.0 * fine[2 * i + 1] - u[i]) / 3.0;
    }
    u.back() = 0.0;
    return RadialFunction(grid_, std::move(u));
  }

  /// S(t) applied to regular node values on the engine grid (solver path:
  /// operators are cached per t, the ball engine steps node values directly).
  std::vector<double> apply_regular(const std::vector<double>& v, double t) const {
    if (!(t > 0.0)) throw std::invalid_argument("heat_apply: t must be > 0");
    if (kind_ == EngineKind::free_space) return free_operator(t, 0.0, grid_->max_radius())->apply(v);
    std::vector<double> u(v);
    state_->stepper->advance(u, t);
    return u;
  }

  /// Free-space S(t) f evaluated at arbitrary radii (free engine only).
  std::vector<double> apply_at(const RadialFunction& f, double t, const std::vector<double>& targets) const {
    if (kind_ != EngineKind::free_space) throw std::invalid_argument("apply_at: free-space engine only");
    const auto op = build_free_operator(state_->kernel, f.grid(), targets, t, f.singular_power(), f.outer_radius());
    return op.apply(f.reduced_values());
  }

  void clear_cache() const {
    std::lock_guard<std::mutex> lock(state_->mutex);
    state_->cache.clear();
  }

 private:
  struct State {
    explicit State(FreeKernel k) : kernel(std::move(k)) {}
    FreeKernel kernel;
    std::shared_ptr<BallStepper> stepper, fine_stepper;
    GridPtr fine_grid;
    std::mutex mutex;
    std::map<std::tuple<double, double, double>, std::shared_ptr<const HeatOperator>> cache;
  };

  std::shared_ptr<const HeatOperator> free_operator(double t, double gamma, double edge) const {
    const auto key = std::make_tuple(t, gamma, edge);
    {
      std::lock_guard<std::mutex> lock(state_->mutex);
      const auto it = state_->cache.find(key);
      if (it != state_->cache.end()) return it->second;
    }
    auto op = std::make_shared<const HeatOperator>(
        build_free_operator(state_->kernel, *grid_, grid_->nodes(), t, gamma, edge));
    std::lock_guard<std::mutex> lock(state_->mutex);
    state_->cache.emplace(key, op);
    return op;
  }

  std::vector<double> ball_run(const RadialFunction& f, const RadialGrid& grid, const BallStepper& stepper,
                               double t) const {
    std::vector<double> u;
    double rest = t;
    if (f.singular_power() > 0.0) {
      // Short free-space step, restricted to the ball, avoids stepping the singularity.
      const double ts = std::min(t, opt_.startup_steps * stepper.max_step());
      const RadialFunction* src = &f;
      std::optional<RadialFunction> resampled;
      if (!f.grid().same_as(grid)) {
        resampled = RadialFunction::sample(
            RadialGrid::make(grid.dimension(), grid.max_radius(), grid.size(), 1.0),
            [&](double s) { return f.at(s); }, f.singular_power(), f.support_radius());
        src = &*resampled;
      }
      u = build_free_operator(state_->kernel, src->grid(), grid.nodes(), ts, src->singular_power(),
                              src->outer_radius())
              .apply(src->reduced_values());
      rest = t - ts;
    } else {
      u = ball_cell_averages(f, grid);
    }
    u.back() = 0.0;
    stepper.advance(u, rest);
    return u;
  }

  EngineKind kind_ = EngineKind::free_space;
  GridPtr grid_;
  EngineOptions opt_;
  std::shared_ptr<State> state_;
};

inline RadialFunction heat_apply(const SemigroupEngine& engine, const RadialFunction& f, double t) {
  return engine.apply(f, t);
}

// ---------------------------------------------------------------------------
// Estimate checks

struct SmoothingCheck {
  double lhs = 0.0;
  double bound = 0.0;
  bool satisfied = false;
  CheckRecord record;
};

/// ||S(t) f||_{q2} <= (4 pi t)^{-(N/2)(1/q1 - 1/q2)} ||f||_{q1}, relative tolerance `tol`.
inline SmoothingCheck verify_smoothing(const SemigroupEngine& engine, const RadialFunction& f, double t, double q1,
                                       double q2, double tol = 1e-3) {
  if (!(q1 >= 1.0) || !(q2 >= 1.0)) throw std::invalid_argument("verify_smoothing: exponents must be >= 1");
  if (q1 > q2) throw std::invalid_argument("verify_smoothing: q1 > q2");
  if (!(t > 0.0)) throw std::invalid_argument("verify_smoothing: t must be > 0");
  const int N = engine.dimension();
  const auto u = engine.apply(f, t);
  const double inv1 = std::isinf(q1) ? 0.0 : 1.0 / q1;
  const double inv2 = std::isinf(q2) ? 0.0 : 1.0 / q2;
  SmoothingCheck out;
  out.lhs = radial_norm(u, q2);
  out.bound = std::pow(4.0 * std::numbers::pi * t, -0.5 * N * (inv1 - inv2)) * radial_norm(f, q1);
  out.satisfied = out.lhs <= out.bound * (1.0 + tol);
  out.record.check = "smoothing";
  out.record.params = {{"N", N}, {"t", t}, {"q1", std::isinf(q1) ? json("inf") : json(q1)},
                       {"q2", std::isinf(q2) ? json("inf") : json(q2)}};
  out.record.lhs = out.lhs;
  out.record.rhs = out.bound;
  out.record.ratio = out.bound > 0.0 ? out.lhs / out.bound : 0.0;
  out.record.pass = out.satisfied;
  return out;
}

/// Geometric grid of n points from lo to hi.
inline std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("geometric_grid: bad range");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  out.back() = hi;
  return out;
}

struct SingularDecayEstimate {
  double C0_hat = 0.0;
  double slope_hat = 0.0;
  std::vector<double> times;
  std::vector<double> norms;
  CheckRecord record;
};

/// Measures C in ||S(t)(|x|^-gamma chi_{B_1})||_{q2} <= C t^{-(N/2)(1/q1 - 1/q2) - gamma/2}
/// over t in [t_lo, t_hi]. The engine grid must have radius >= 1.
inline SingularDecayEstimate estimate_singular_decay_constant(int N, double gamma, double q1, double q2,
                                               const SemigroupEngine& engine, int points = 13,
                                               double t_lo = 1e-4, double t_hi = 1e-1) {
  if (engine.dimension() != N) throw std::invalid_argument("estimate_singular_decay_constant: engine dimension mismatch");
  if (!(gamma > 0.0 && gamma < N)) throw std::invalid_argument("estimate_singular_decay_constant: gamma must lie in (0, N)");
  if (!(q1 > 1.0) || !(q2 > 1.0)) throw std::invalid_argument("estimate_singular_decay_constant: q1, q2 must lie in (1, inf]");
  const double inv1 = std::isinf(q1) ? 0.0 : 1.0 / q1;
  const double inv2 = std::isinf(q2) ? 0.0 : 1.0 / q2;
  const double mid = gamma / N + inv1;
  if (!(0.0 <= inv2 && inv2 < mid && mid < 1.0))
    throw std::invalid_argument("estimate_singular_decay_constant: need 0 <= 1/q2 < gamma/N + 1/q1 < 1");
  if (engine.grid()->max_radius() < 1.0) throw std::invalid_argument("estimate_singular_decay_constant: grid radius < 1");
  const auto f = RadialFunction::sample(
      engine.grid(), [&](double s) { return s <= 1.0 ? std::pow(s, -gamma) : 0.0; }, gamma, 1.0);
  const double expo = 0.5 * N * (inv1 - inv2) + 0.5 * gamma;
  SingularDecayEstimate out;
  out.times = geometric_grid(t_lo, t_hi, points);
  double mx = 0.0, my = 0.0;
  std::vector<double> xs, ys;
  for (double t : out.times) {
    const double n = radial_norm(engine.apply(f, t), q2);
    out.norms.push_back(n);
    out.C0_hat = std::max(out.C0_hat, std::pow(t, expo) * n);
    xs.push_back(std::log(t));
    ys.push_back(std::log(n));
    mx += xs.back();
    my += ys.back();
  }
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  out.slope_hat = sxy / sxx;
  out.record.check = "singular_decay";
  out.record.params = {{"N", N}, {"gamma", gamma}, {"q1", std::isinf(q1) ? json("inf") : json(q1)},
                       {"q2", std::isinf(q2) ? json("inf") : json(q2)}, {"C0_hat", out.C0_hat}};
  out.record.lhs = out.slope_hat;
  out.record.rhs = -expo;
  out.record.ratio = out.slope_hat / -expo;
  out.record.pass = std::abs(out.slope_hat + expo) <= 0.05;
  return out;
}

struct LowerBoundRow {
  double t = 0.0;
  double min_ratio_i = 0.0;   ///< empirical c_N
  double min_ratio_ii = 0.0;  ///< empirical c'_N
  bool pass = false;
};

struct LowerBoundCheck {
  std::vector<LowerBoundRow> rows;
  bool pass = false;
  CheckRecord record;
};

/// Empirical lower-bound constants for the ball semigroup:
/// (i) S(t) chi_l / [l^N (l + sqrt t)^-N] on B_{l + sqrt t},
/// (ii) S(t)(|x|^-gamma chi_l) / t^{-gamma/2} on B_{sqrt t}.
inline LowerBoundCheck verify_lower_bounds(const SemigroupEngine& engine, double l, double gamma,
                                       const std::vector<double>& t_list) {
  if (engine.kind() != EngineKind::dirichlet_ball)
    throw std::invalid_argument("verify_lower_bounds: requires the Dirichlet-ball engine");
  const auto& grid = engine.grid();
  const int N = grid->dimension();
  const double R = grid->max_radius();
  if (!(l > 0.0 && l < R)) throw std::invalid_argument("verify_lower_bounds: need 0 < l < R");
  if (!(gamma > 0.0 && gamma < N)) throw std::invalid_argument("verify_lower_bounds: gamma must lie in (0, N)");
  const double delta = 0.5 * (R - l);
  for (double t : t_list) {
    if (!(t > 0.0) || t > delta * delta) throw std::invalid_argument("verify_lower_bounds: t exceeds delta^2");
    if (t > l * l) throw std::invalid_argument("verify_lower_bounds: t exceeds l^2");
  }
  const auto box = RadialFunction::sample(grid, [&](double s) { return s <= l ? 1.0 : 0.0; }, 0.0, l);
  const auto spike = RadialFunction::sample(
      grid, [&](double s) { return s <= l ? std::pow(s, -gamma) : 0.0; }, gamma, l);
  LowerBoundCheck out;
  double lo_i = kInf, hi_i = 0.0, lo_ii = kInf, hi_ii = 0.0;
  bool all_positive = true;
  for (double t : t_list) {
    LowerBoundRow row;
    row.t = t;
    const double st = std::sqrt(t);
    const auto u1 = engine.apply(box, t);
    const auto u2 = engine.apply(spike, t);
    const double scale_i = std::pow(l, N) * std::pow(l + st, -N);
    const double scale_ii = std::pow(t, -0.5 * gamma);
    row.min_ratio_i = kInf;
    row.min_ratio_ii = kInf;
    for (int i = 0; i < grid->size(); ++i) {
      const double s = (*grid)[i];
      if (s <= l + st) row.min_ratio_i = std::min(row.min_ratio_i, u1[i] / scale_i);
      if (s <= st) row.min_ratio_ii = std::min(row.min_ratio_ii, u2[i] / scale_ii);
    }
    if (!std::isfinite(row.min_ratio_ii))
      throw std::invalid_argument("verify_lower_bounds: no grid node inside B_{sqrt t}; refine the grid");
    row.pass = row.min_ratio_i > 0.0 && row.min_ratio_ii > 0.0;
    all_positive = all_positive && row.pass;
    lo_i = std::min(lo_i, row.min_ratio_i);
    hi_i = std::max(hi_i, row.min_ratio_i);
    lo_ii = std::min(lo_ii, row.min_ratio_ii);
    hi_ii = std::max(hi_ii, row.min_ratio_ii);
    out.rows.push_back(row);
  }
  const double spread = std::max(hi_i / lo_i, hi_ii / lo_ii);
  out.pass = all_positive && spread <= 3.0;
  out.record.check = "lower_bounds";
  out.record.params = {{"N", N}, {"l", l}, {"gamma", gamma}, {"R", R}, {"c_N_min", lo_i}, {"c_N_max", hi_i},
                       {"c_prime_min", lo_ii}, {"c_prime_max", hi_ii}};
  out.record.lhs = spread;
  out.record.rhs = 3.0;
  out.record.ratio = spread / 3.0;
  out.record.pass = out.pass;
  return out;
}

struct OrderingCheck {
  bool ordered = false;
  double worst_small_vs_large = 0.0;  ///< max(S_small - S_large)
  double worst_large_vs_free = 0.0;   ///< max(S_large - S_free)
  double tolerance = 0.0;
  std::vector<double> radii, small, large, free;
  CheckRecord record;
};

struct OrderingOptions {
  double spacing = 1.0 / 128.0;  ///< ball grid spacing h (both balls)
  bool richardson = true;
  double rel_tol = 1e-6;
};

/// S_ball(R_small)(t) f <= S_ball(R_large)(t) f <= S_free(t) f on the small
/// ball's nodes, within rel_tol * ||S_free(t) f||_inf. `free_engine` supplies
/// the free-space semigroup on f's own grid.
inline OrderingCheck verify_kernel_ordering(const SemigroupEngine& free_engine, const RadialFunction& f, double t,
                                            double R_small, double R_large, const OrderingOptions& opt = {}) {
  if (free_engine.kind() != EngineKind::free_space)
    throw std::invalid_argument("verify_kernel_ordering: first engine must be free space");
  if (!(R_small < R_large)) throw std::invalid_argument("verify_kernel_ordering: need R_small < R_large");
  for (double v : f.values())
    if (v < 0.0) throw std::invalid_argument("verify_kernel_ordering: data must be nonnegative");
  if (f.outer_radius() > R_small) {
    const auto& r = f.grid().nodes();
    for (int i = 0; i < f.size(); ++i)
      if (r[i] > R_small && f[i] != 0.0)
        throw std::invalid_argument("verify_kernel_ordering: data not supported in the small ball");
  }
  const int N = f.grid().dimension();
  const int M_small = static_cast<int>(std::lround(R_small / opt.spacing));
  const int M_large = static_cast<int>(std::lround(R_large / opt.spacing));
  EngineOptions eo;
  eo.richardson = opt.richardson;
  const auto small_engine = SemigroupEngine::dirichlet_ball(N, R_small, M_small, eo);
  const auto large_engine = SemigroupEngine::dirichlet_ball(N, R_large, M_large, eo);
  auto resample = [&](const SemigroupEngine& e) {
    std::optional<double> support = f.support_radius();
    if (support && *support > e.grid()->max_radius()) support = e.grid()->max_radius();
    return RadialFunction::sample(
        e.grid(), [&](double s) { return f.at(s); }, f.singular_power(), support);
  };
  const auto us = small_engine.apply(resample(small_engine), t);
  const auto ul = large_engine.apply(resample(large_engine), t);
  OrderingCheck out;
  out.radii = small_engine.grid()->nodes();
  out.free = free_engine.apply_at(f, t, out.radii);
  const double scale = *std::max_element(out.free.begin(), out.free.end());
  out.tolerance = opt.rel_tol * scale;
  out.worst_small_vs_large = -kInf;
  out.worst_large_vs_free = -kInf;
  for (int i = 0; i < M_small; ++i) {
    const double rs = us[i];
    const double rl = ul[i];
    const double rf = out.free[i];
    out.small.push_back(rs);
    out.large.push_back(rl);
    out.worst_small_vs_large = std::max(out.worst_small_vs_large, rs - rl);
    out.worst_large_vs_free = std::max(out.worst_large_vs_free, rl - rf);
  }
  out.ordered = out.worst_small_vs_large <= out.tolerance && out.worst_large_vs_free <= out.tolerance;
  out.record.check = "kernel_ordering";
  out.record.params = {{"N", N}, {"t", t}, {"R_small", R_small}, {"R_large", R_large}, {"h", opt.spacing},
                       {"richardson", opt.richardson}};
  out.record.lhs = std::max(out.worst_small_vs_large, out.worst_large_vs_free);
  out.record.rhs = out.tolerance;
  out.record.ratio = out.tolerance > 0.0 ? out.record.lhs / out.tolerance : 0.0;
  out.record.pass = out.ordered;
  return out;
}

/// Closed-form t -> 0 limit of t^{gamma/2} ||S(t)(|x|^-gamma chi_{B_1})||_inf:
/// (4 pi)^{-N/2} sigma_{N-1} 2^{N-gamma-1} Gamma((N-gamma)/2).
inline double singular_decay_constant_limit(int N, double gamma) {
  return std::pow(4.0 * std::numbers::pi, -0.5 * N) * sphere_area(N) * std::pow(2.0, N - gamma - 1.0) *
         std::tgamma(0.5 * (N - gamma));
}

}  // namespace heatlab

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <vector>

namespace heatlab::quad {

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Rule of fixed order, built once per order.
template <int N>
const GaussRule& gauss_legendre_cached() {
  static const GaussRule rule = gauss_legendre(N);
  return rule;
}

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool finite = true;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on [a, b].
///
/// The interval is pre-split into `initial_pieces` equal parts, then the
/// segment with the largest error estimate is bisected until the summed
/// error drops below max(abs_tol, rel_tol * |value|).
template <class F>
Result integrate(F&& f, double a, double b, double rel_tol = 1e-11,
                 double abs_tol = 0.0, int initial_pieces = 1,
                 int max_segments = 4000) {
  Result out;
  if (a == b) return out;
  std::priority_queue<detail::Segment> heap;
  double total = 0.0, error = 0.0;
  const double step = (b - a) / initial_pieces;
  for (int i = 0; i < initial_pieces; ++i) {
    const double lo = a + i * step;
    const double hi = (i + 1 == initial_pieces) ? b : a + (i + 1) * step;
    auto seg = detail::gk15(f, lo, hi);
    total += seg.value;
    error += seg.error;
    heap.push(seg);
  }
  out.evaluations = 15 * initial_pieces;
  int segments = initial_pieces;
  while (std::isfinite(total) && error > std::max(abs_tol, rel_tol * std::abs(total)) &&
         segments < max_segments) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++segments;
  }
  // Re-sum to shed accumulated cancellation from the running updates.
  if (std::isfinite(total)) {
    double sum = 0.0, err = 0.0;
    while (!heap.empty()) {
      sum += heap.top().value;
      err += heap.top().error;
      heap.pop();
    }
    total = sum;
    error = err;
  }
  out.value = total;
  out.abs_error = error;
  out.finite = std::isfinite(total);
  return out;
}

/// Outcome of classifying an improper integral over [lower, infinity).
struct TailResult {
  double value = 0.0;           ///< +inf when not converged
  bool converged = false;
  double tail_exponent = 0.0;   ///< fitted k in integrand ~ c * sigma^k
  double truncation = 0.0;      ///< Z, end of the quadrature range
  double finite_part = 0.0;     ///< integral over [lower, Z]
  double tail_part = 0.0;       ///< fitted contribution over [Z, inf)
};

struct TailOptions {
  double decades = 12.0;        ///< Z = max(lower, 1) * 10^decades
  double fit_decades = 2.0;     ///< tail fit uses [Z / 10^fit_decades, Z]
  int fit_points = 21;
  double divergence_band = 0.05;  ///< diverges when k >= -1 - band
  double rel_tol = 1e-12;
};

/// Integrates a nonnegative integrand over [lower, inf).
///
/// Quadrature runs in the log variable on [lower, Z]; the remainder is
/// modelled by a power law fitted over the last decades of the range.
/// The integral is declared divergent when the fitted exponent is not
/// below -1 - band, or when the integrand stops being finite.
template <class F>
TailResult integrate_to_infinity(F&& f, double lower, const TailOptions& opt = {}) {
  if (!(lower > 0.0)) throw std::invalid_argument("integrate_to_infinity: lower must be > 0");
  TailResult out;
  const double upper = std::max(lower, 1.0) * std::pow(10.0, opt.decades);
  out.truncation = upper;

  // Tail fit first: non-finite samples short-circuit to divergence.
  const double fit_lo = std::log(upper) - opt.fit_decades * std::numbers::ln10;
  const double fit_hi = std::log(upper);
  std::vector<double> xs, ys;
  bool any_zero = false;
  for (int i = 0; i < opt.fit_points; ++i) {
    const double u = fit_lo + (fit_hi - fit_lo) * i / (opt.fit_points - 1);
    const double v = f(std::exp(u));
    if (!std::isfinite(v)) {
      out.value = std::numeric_limits<double>::infinity();
      out.tail_exponent = std::numeric_limits<double>::infinity();
      return out;
    }
    if (v <= 0.0) {
      any_zero = true;
      continue;
    }
    xs.push_back(u);
    ys.push_back(std::log(v));
  }
  double amplitude_log = 0.0;
  if (xs.size() < 2) {
    // Integrand vanished (underflow) over the fit window.
    out.tail_exponent = -std::numeric_limits<double>::infinity();
  } else {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= xs.size();
    my /= xs.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    out.tail_exponent = sxy / sxx;
    amplitude_log = my - out.tail_exponent * mx;
    if (any_zero && out.tail_exponent > -1.0 - opt.divergence_band) {
      // Mixed zero/positive samples: trust the zeros, integrand is dying.
      out.tail_exponent = -std::numeric_limits<double>::infinity();
    }
  }
  if (out.tail_exponent >= -1.0 - opt.divergence_band) {
    out.converged = false;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }

  auto in_log = [&](double u) {
    const double s = std::exp(u);
    return f(s) * s;
  };
  const double lo = std::log(lower), hi = std::log(upper);
  const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / std::numbers::ln10)));
  const auto finite = integrate(in_log, lo, hi, opt.rel_tol, 0.0, pieces, 20000);
  out.finite_part = finite.value;
  if (!finite.finite) {
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  if (std::isfinite(out.tail_exponent)) {
    const double k1 = out.tail_exponent + 1.0;
    out.tail_part = std::exp(amplitude_log + k1 * std::log(upper)) / (-k1);
  }
  out.value = out.finite_part + out.tail_part;
  out.converged = true;
  return out;
}

}  // namespace heatlab::quad

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatlab/criteria.hpp"
#include "heatlab/nonlinearity.hpp"
#include "heatlab/quadrature.hpp"
#include "heatlab/radial_field.hpp"
#include "heatlab/semigroup.hpp"

namespace heatlab {

/// Geometric time nodes from t0 = start_fraction * T to T.
inline std::vector<double> solver_time_grid(double T, int steps = 160, double start_fraction = 1e-4) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("solver_time_grid: T must be > 0");
  if (steps < 1) throw std::invalid_argument("solver_time_grid: need at least one step");
  if (!(start_fraction > 0.0 && start_fraction < 1.0))
    throw std::invalid_argument("solver_time_grid: start fraction must lie in (0, 1)");
  return geometric_grid(start_fraction * T, T, steps + 1);
}

enum class SolveStatus { converged, blown_up, max_iter };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::blown_up:
      return "blown_up";
    case SolveStatus::max_iter:
      return "max_iter";
  }
  return "";
}

struct SolveTrace {
  std::vector<double> times;
  std::vector<RadialFunction> snapshots;
  std::vector<double> sup_norm_history;
  std::vector<double> lr_norm_history;
  std::vector<double> sweep_changes;  ///< scaled sup change of each Picard sweep
  int iterations = 0;
  SolveStatus status = SolveStatus::converged;
  double C_meas = 0.0;
  double rho = 0.0;
  double r = 1.0;
  double residual = 0.0;  ///< scaled ||u - F(u)|| after the last sweep
  double startup_error_bound = 0.0;
  double monotone_violation = 0.0;  ///< max over sweeps of u^{n+1} - u^n
  double sandwich_violation = 0.0;  ///< max over nodes of (u - w)_+ and (v - u)_+
  std::optional<double> escape_time;
  std::string method;

  json header() const {
    return {{"method", method},
            {"status", to_string(status)},
            {"iterations", iterations},
            {"C_meas", C_meas},
            {"rho", rho},
            {"r", r},
            {"residual", residual},
            {"startup_error_bound", startup_error_bound},
            {"monotone_violation", monotone_violation},
            {"sandwich_violation", sandwich_violation},
            {"escape_time", escape_time ? json(*escape_time) : json(nullptr)},
            {"steps", times.empty() ? 0 : static_cast<int>(times.size()) - 1}};
  }

  /// Rows of t, sup_norm, lr_norm, t^{rho/2r} sup_norm.
  void write_csv(std::ostream& os) const {
    os << "t,sup_norm,lr_norm,scaled_sup\n";
    os.precision(12);
    for (std::size_t k = 0; k < sup_norm_history.size(); ++k)
      os << times[k] << ',' << sup_norm_history[k] << ',' << lr_norm_history[k] << ','
         << std::pow(times[k], rho / (2.0 * r)) * sup_norm_history[k] << '\n';
  }
};

struct SandwichPair {
  std::vector<double> times;
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> v;
  double A = 2.0;
  double C0 = 0.0;
  std::optional<double> T_star;
  std::vector<double> margin_curve;  ///< continuous admissibility margin at each grid time
  std::vector<double> discrete_ratio;  ///< max_i F(w)_i / w_i at each grid time
  bool verified = false;               ///< F(w) <= w (1 + 1e-4) at every grid time up to T_star
  double startup_error_bound = 0.0;

  json to_json() const {
    return {{"A", A},
            {"C0", C0},
            {"T_star", T_star ? json(*T_star) : json(nullptr)},
            {"verified", verified},
            {"startup_error_bound", startup_error_bound},
            {"margin_at_T_star", T_star ? json(margin_curve[index_of_T_star()]) : json(nullptr)}};
  }

  std::size_t index_of_T_star() const {
    std::size_t k = 0;
    while (k + 1 < times.size() && T_star && times[k + 1] <= *T_star) ++k;
    return k;
  }
};

namespace detail {

/// \int_0^t h(sigma) E(B sigma^{-rho/2r}) d sigma via the substitution
/// y = B sigma^{-rho/2r}; +inf when the integral diverges.
template <class Envelope>
double singular_time_integral(const Weight& h, double r, double rho, double B, double t, Envelope&& env) {
  if (B == 0.0) return t == 0.0 ? 0.0 : h.integral(t) * env(0.0);
  const double k = 2.0 * r / rho;
  const double lower = B * std::pow(t, -rho / (2.0 * r));
  const double Bk = std::pow(B, k);
  const auto res = quad::integrate_to_infinity(
      [&](double y) {
        const double e = env(y);
        if (e == 0.0) return 0.0;
        return std::pow(y, -(1.0 + k)) * h(Bk * std::pow(y, -k)) * e;
      },
      lower);
  if (!res.converged) return kInf;
  return k * Bk * res.value;
}

inline double scaled_change(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, mag = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    mag = std::max(mag, std::abs(a[i]));
  }
  return diff / (1.0 + mag);
}

inline double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

/// Continuous admissibility margin 1/A + \int_0^t h(s) G(A C0 K^{1/r} s^{-rho/2r}) ds.
/// w = A S(t)|u0| is a supersolution on (0, t) while this stays <= 1.
inline double admissibility_margin(const ProblemSpec& spec, double A, double C0, double t) {
  const double B = A * C0 * std::pow(spec.K, 1.0 / spec.r);
  return 1.0 / A + detail::singular_time_integral(spec.h, spec.r, spec.rho, B, t,
                                                  [&](double y) { return y == 0.0 ? 0.0 : envelope_G(spec.f, y); });
}

/// Largest t with margin <= 1 (bisection in log t over [1e-14, t_max]); empty when none.
inline std::optional<double> admissible_time(const ProblemSpec& spec, double A, double C0, double t_max = 1.0) {
  double lo = 1e-14, hi = t_max;
  if (admissibility_margin(spec, A, C0, lo) > 1.0) return std::nullopt;
  if (admissibility_margin(spec, A, C0, hi) <= 1.0) return hi;
  for (int it = 0; it < 80; ++it) {
    const double mid = std::sqrt(lo * hi);
    (admissibility_margin(spec, A, C0, mid) <= 1.0 ? lo : hi) = mid;
    if (hi / lo < 1.0 + 1e-10) break;
  }
  return lo;
}

namespace detail {

// Forward mild recurrence u_{k+1} = S(dt_k)[u_k + dt_k h(t_k) g(src_k)].
inline std::vector<std::vector<double>> mild_sweep(const SemigroupEngine& engine, const ProblemSpec& spec,
                                                   const std::vector<double>& times,
                                                   const std::vector<double>& start,
                                                   const std::vector<std::vector<double>>& src) {
  std::vector<std::vector<double>> out(times.size());
  out[0] = start;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double dt = times[k + 1] - times[k];
    const double hk = spec.h(times[k]);
    std::vector<double> acc(out[k]);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += dt * hk * spec.f(src[k][i]);
    out[k + 1] = engine.apply_regular(acc, dt);
  }
  return out;
}

inline void require_solver_grid(const SemigroupEngine& engine, const ProblemSpec& spec,
                                const std::vector<double>& times) {
  spec.validate();
  if (engine.dimension() != spec.N) throw std::invalid_argument("solver: engine dimension does not match spec");
  if (times.size() < 2) throw std::invalid_argument("solver: time grid needs at least two nodes");
  if (!(times[0] > 0.0)) throw std::invalid_argument("solver: time grid must start after 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw std::invalid_argument("solver: time grid must be increasing");
}

}  // namespace detail

/// w(t_k) = A S(t_k)|u0| and the matching subsolution, plus the admissible time.
///
/// w is advanced as w_{k+1} = S(dt_k) w_k from w_0 = A S(t_0)|u0| so it shares
/// the discretisation used by the iteration.
inline SandwichPair build_supersolution(const ProblemSpec& spec, const SemigroupEngine& engine,
                                        const RadialFunction& u0, const std::vector<double>& times, double A,
                                        double C0) {
  detail::require_solver_grid(engine, spec, times);
  if (!(A > 1.0)) throw std::invalid_argument("build_supersolution: A must be > 1");
  if (!(C0 > 0.0)) throw std::invalid_argument("build_supersolution: C0 must be > 0");
  const auto& fl = spec.f.flags();
  if (!fl.nondecreasing || !fl.zero_at_zero)
    throw std::invalid_argument("build_supersolution: g must be nondecreasing with g(0) = 0");

  SandwichPair pair;
  pair.times = times;
  pair.A = A;
  pair.C0 = C0;
  const auto abs0 = u0.mapped([](double x) { return std::abs(x); });
  const auto s0 = engine.apply(abs0, times[0]).values();
  const double data_norm = detail::sup_abs(u0.values());

  std::vector<double> w0(s0);
  for (double& x : w0) x *= A;
  pair.w.assign(times.size(), {});
  pair.w[0] = w0;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) pair.w[k + 1] = engine.apply_regular(pair.w[k], times[k + 1] - times[k]);

  // Nonnegative f with f(0) = 0 keeps 0 a subsolution; otherwise use -w.
  bool nonnegative = true;
  for (double x : u0.values()) nonnegative = nonnegative && x >= 0.0;
  const bool zero_sub = nonnegative && spec.f(-1.0) >= 0.0;
  pair.v.assign(times.size(), std::vector<double>(w0.size(), 0.0));
  if (!zero_sub)
    for (std::size_t k = 0; k < times.size(); ++k)
      for (std::size_t i = 0; i < w0.size(); ++i) pair.v[k][i] = -pair.w[k][i];

  for (double t : times) pair.margin_curve.push_back(data_norm == 0.0 ? 1.0 / A : admissibility_margin(spec, A, C0, t));
  for (std::size_t k = 0; k < times.size(); ++k)
    if (pair.margin_curve[k] <= 1.0) pair.T_star = times[k];

  // Discrete F(w) <= w.
  const auto start = nonnegative ? s0 : engine.apply(u0, times[0]).values();
  const auto F = detail::mild_sweep(engine, spec, times, start, pair.w);
  pair.verified = pair.T_star.has_value();
  for (std::size_t k = 0; k < times.size(); ++k) {
    double ratio = 0.0;
    const double floor = 1e-12 * (1.0 + detail::sup_abs(pair.w[k]));
    for (std::size_t i = 0; i < F[k].size(); ++i)
      if (pair.w[k][i] > floor) ratio = std::max(ratio, F[k][i] / pair.w[k][i]);
      else if (F[k][i] > floor) ratio = kInf;
    pair.discrete_ratio.push_back(ratio);
    if (pair.T_star && times[k] <= *pair.T_star && ratio > 1.0 + 1e-4) pair.verified = false;
  }
  if (data_norm == 0.0) {
    pair.T_star = times.back();
    pair.verified = true;
  }
  pair.startup_error_bound = detail::sup_abs(pair.w[0]) * (pair.margin_curve[0] - 1.0 / A);
  return pair;
}

struct IterateOptions {
  double tol = 1e-6;
  int max_iter = 200;
  bool keep_snapshots = true;
};

namespace detail {

inline void finish_trace(SolveTrace& tr, const ProblemSpec& spec, const SemigroupEngine& engine,
                         const std::vector<std::vector<double>>& u) {
  tr.rho = spec.rho;
  tr.r = spec.r;
  tr.C_meas = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    RadialFunction snap(engine.grid(), u[k]);
    const double sup = sup_abs(u[k]);
    tr.sup_norm_history.push_back(sup);
    tr.lr_norm_history.push_back(radial_norm(snap, spec.r));
    tr.C_meas = std::max(tr.C_meas, std::pow(tr.times[k], spec.rho / (2.0 * spec.r)) * sup);
    tr.snapshots.push_back(std::move(snap));
  }
}

inline bool finite_state(const std::vector<std::vector<double>>& u) {
  for (const auto& row : u)
    for (double x : row)
      if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

/// Picard iteration u^n = F(u^{n-1}) started from the supersolution.
inline SolveTrace monotone_iterate(const ProblemSpec& spec, const SemigroupEngine& engine, const RadialFunction& u0,
                                   const SandwichPair& pair, const IterateOptions& opt = {}) {
  const auto& times = pair.times;
  detail::require_solver_grid(engine, spec, times);
  if (!pair.verified) throw std::invalid_argument("monotone_iterate: supersolution not verified on this grid");
  if (pair.T_star && times.back() > *pair.T_star)
    throw std::invalid_argument("monotone_iterate: time grid extends past T_star");

  SolveTrace tr;
  tr.method = "monotone_iteration";
  tr.times = times;
  tr.startup_error_bound = pair.startup_error_bound;
  const auto start = engine.apply(u0, times[0]).values();
  auto prev = pair.w;
  tr.status = SolveStatus::max_iter;
  for (int n = 1; n <= opt.max_iter; ++n) {
    auto next = detail::mild_sweep(engine, spec, times, start, prev);
    tr.iterations = n;
    if (!detail::finite_state(next)) {
      tr.status = SolveStatus::blown_up;
      prev = std::move(next);
      break;
    }
    double change = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      change = std::max(change, detail::scaled_change(next[k], prev[k]));
      for (std::size_t i = 0; i < next[k].size(); ++i)
        tr.monotone_violation = std::max(tr.monotone_violation, next[k][i] - prev[k][i]);
    }
    tr.sweep_changes.push_back(change);
    prev = std::move(next);
    if (change < opt.tol) {
      tr.status = SolveStatus::converged;
      break;
    }
  }
  if (tr.status != SolveStatus::blown_up) {
    const auto F = detail::mild_sweep(engine, spec, times, start, prev);
    for (std::size_t k = 0; k < times.size(); ++k)
      tr.residual = std::max(tr.residual, detail::scaled_change(F[k], prev[k]));
    for (std::size_t k = 0; k < times.size(); ++k)
      for (std::size_t i = 0; i < prev[k].size(); ++i)
        tr.sandwich_violation = std::max(
            {tr.sandwich_violation, prev[k][i] - pair.w[k][i], pair.v[k][i] - prev[k][i]});
    detail::finish_trace(tr, spec, engine, prev);
  }
  if (!opt.keep_snapshots) tr.snapshots.clear();
  return tr;
}

/// One forward sweep of the mild recurrence; stops once ||u||_inf exceeds the cap.
inline SolveTrace direct_mild_solve(const ProblemSpec& spec, const SemigroupEngine& engine, const RadialFunction& u0,
                                    const std::vector<double>& times, double blowup_cap = 1e8) {
  detail::require_solver_grid(engine, spec, times);
  if (!(blowup_cap > 0.0)) throw std::invalid_argument("direct_mild_solve: blowup cap must be > 0");
  SolveTrace tr;
  tr.method = "direct";
  std::vector<std::vector<double>> u{engine.apply(u0, times[0]).values()};
  tr.times.push_back(times[0]);
  tr.status = SolveStatus::converged;
  auto escaped = [&](const std::vector<double>& v) {
    const double m = detail::sup_abs(v);
    return !std::isfinite(m) || m > blowup_cap;
  };
  if (escaped(u[0])) {
    tr.status = SolveStatus::blown_up;
    tr.escape_time = times[0];
  }
  for (std::size_t k = 0; k + 1 < times.size() && tr.status == SolveStatus::converged; ++k) {
    const double dt = times[k + 1] - times[k];
    const double hk = spec.h(times[k]);
    std::vector<double> acc(u[k]);
    for (double& x : acc) x += dt * hk * spec.f(x);
    auto next = engine.apply_regular(acc, dt);
    if (escaped(next)) {
      tr.status = SolveStatus::blown_up;
      tr.escape_time = times[k + 1];
      break;
    }
    u.push_back(std::move(next));
    tr.times.push_back(times[k + 1]);
  }
  tr.iterations = 1;
  detail::finish_trace(tr, spec, engine, u);
  return tr;
}

struct ProbeRow {
  double tau = 0.0;
  double sup_norm = 0.0;  ///< ||S(tau) v0||_inf
  double Phi = 0.0;
  bool violated = false;
};

struct ProbeResult {
  bool applicable = false;
  std::string reason;
  std::vector<ProbeRow> rows;
  double Phi_max = 0.0;
  bool violated = false;  ///< Phi > 1 somewhere: no nonnegative solution beyond that tau

  json to_json() const {
    json rs = json::array();
    for (const auto& r : rows)
      rs.push_back({{"tau", r.tau}, {"sup_norm", r.sup_norm}, {"Phi", r.Phi}, {"violated", r.violated}});
    return {{"applicable", applicable}, {"reason", reason}, {"Phi_max", Phi_max}, {"violated", violated}, {"rows", rs}};
  }
};

/// Phi(tau) = [\int_0^tau h] / H(||S(tau) v0||_inf) with H(z) = \int_z^inf 1/f.
/// A nonnegative mild solution on (0, T) forces Phi(tau) <= 1 for tau < T.
inline ProbeResult blowup_probe(const ProblemSpec& spec, const SemigroupEngine& engine, const RadialFunction& v0,
                                const std::vector<double>& taus) {
  spec.validate();
  ProbeResult out;
  const auto& fl = spec.f.flags();
  if (!(fl.convex_on_positives && fl.nondecreasing && fl.zero_at_zero)) {
    out.reason = "f must be convex, nondecreasing and vanish at 0";
    return out;
  }
  for (double x : v0.values())
    if (x < 0.0) throw std::invalid_argument("blowup_probe: data must be nonnegative");
  for (double tau : taus) {
    if (!(tau > 0.0)) throw std::invalid_argument("blowup_probe: tau must be > 0");
    ProbeRow row;
    row.tau = tau;
    row.sup_norm = radial_norm(engine.apply(v0, tau), kInf);
    if (!(row.sup_norm > 0.0) || !(spec.f.positive(row.sup_norm) > 0.0)) {
      out.reason = "S(tau) v0 vanishes or f is zero there";
      out.rows.clear();
      return out;
    }
    const auto H = osgood_tail(spec.f, row.sup_norm);
    if (!H.converged) {
      out.reason = "integral of 1/f diverges at infinity";
      out.rows.clear();
      return out;
    }
    row.Phi = spec.h.integral(tau) / H.value;
    row.violated = row.Phi > 1.0;
    out.Phi_max = std::max(out.Phi_max, row.Phi);
    out.violated = out.violated || row.violated;
    out.rows.push_back(row);
  }
  out.applicable = true;
  return out;
}

struct DecayCheck {
  double C_meas = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// C_meas = max t^{rho/2r}||u||_inf against the envelope A C0 K^{1/r} (5% slack).
inline DecayCheck decay_check(const SolveTrace& trace, const ProblemSpec& spec, double A, double C0) {
  if (trace.status != SolveStatus::converged) throw std::invalid_argument("decay_check: trace did not converge");
  DecayCheck out;
  out.C_meas = trace.C_meas;
  out.bound = A * C0 * std::pow(spec.K, 1.0 / spec.r) * 1.05;
  out.pass = out.C_meas <= out.bound;
  return out;
}

struct GronwallCheck {
  bool applicable = false;
  std::string reason;
  double factor = 0.0;  ///< exp[\int_0^T L(C1 s^{-rho/2r}) h(s) ds]
  double data_distance = 0.0;
  std::vector<double> lhs_curve;
  std::vector<double> rhs_curve;
  bool pass = false;
};

/// ||u(t_k) - v(t_k)||_r <= ||u0 - v0||_r exp[\int_0^T L(C1 s^{-rho/2r}) h(s) ds] (5% slack).
inline GronwallCheck gronwall_uniqueness_check(const SolveTrace& u, const SolveTrace& v, const RadialFunction& u0,
                                               const RadialFunction& v0, const ProblemSpec& spec, double C1) {
  GronwallCheck out;
  const auto integ = check_uniqueness_integral(spec.f, spec.h, spec.r, spec.rho, C1);
  if (!integ.pass) {
    out.reason = "uniqueness integral diverges; uniqueness is not covered";
    return out;
  }
  if (u.status != SolveStatus::converged || v.status != SolveStatus::converged)
    throw std::invalid_argument("gronwall_uniqueness_check: traces must be converged");
  if (u.times != v.times) throw std::invalid_argument("gronwall_uniqueness_check: traces on different time grids");
  if (u.C_meas > C1 * 1.05 || v.C_meas > C1 * 1.05) {
    out.reason = "a trace leaves the class sup t^{rho/2r}||u||_inf <= C1";
    return out;
  }
  detail::require_same_grid(u0, v0);
  out.applicable = true;
  const double expo = detail::singular_time_integral(spec.h, spec.r, spec.rho, C1, u.times.back(),
                                                     [&](double y) { return lipschitz_L(spec.f, y); });
  out.factor = std::exp(expo);
  std::vector<double> d(u0.size());
  for (int i = 0; i < u0.size(); ++i) d[i] = u0[i] - v0[i];
  out.data_distance = radial_norm(RadialFunction(u0.grid_ptr(), d, u0.singular_power(), u0.support_radius()), spec.r);
  out.pass = std::isfinite(out.factor);
  for (std::size_t k = 0; k < u.times.size(); ++k) {
    const auto& a = u.snapshots.at(k);
    const auto& b = v.snapshots.at(k);
    std::vector<double> diff(a.size());
    for (int i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    out.lhs_curve.push_back(radial_norm(RadialFunction(a.grid_ptr(), diff), spec.r));
    out.rhs_curve.push_back(out.data_distance * out.factor * 1.05);
    out.pass = out.pass && out.lhs_curve.back() <= out.rhs_curve.back();
  }
  return out;
}

}  // namespace heatlab

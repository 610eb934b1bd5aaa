// Acceptance battery: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "heatlab/heatlab.hpp"

using namespace heatlab;

namespace {

// Pinned tolerances and runtime budgets (seconds).
constexpr double kA = 2.0;
constexpr double kPicardTol = 1e-6;
constexpr double kSmoothingTol = 1e-3;
constexpr double kSaturation = 0.98;
constexpr double kSlopeTol = 0.05;
constexpr double kC0Stability = 0.10;
constexpr double kLowerSpread = 3.0;
constexpr double kOsgoodTol = 1e-6;
constexpr double kLinearTol = 0.02;
constexpr double kResidualFactor = 10.0;
constexpr double kJensenSlack = 1e-6;
constexpr double kPhiCeiling = 1.05;
constexpr double kProbeHorizon = 1e-2;
constexpr int kGridM = 256;

struct Outcome {
  bool pass = true;
  std::ostringstream note;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note << " [failed: " << what << "]";
    }
  }
};

struct ConvergedRun {
  ProblemSpec spec;
  SolveTrace trace;
};

// Converged existence-regime runs collected by criteria 1 and 2 for criterion 9.
std::vector<ConvergedRun> g_converged;

ProblemSpec cubic(double rho, Weight h = Weight::one(), DataSide side = DataSide::upper) {
  ProblemSpec s;
  s.rho = rho;
  s.h = std::move(h);
  s.side = side;
  return s;
}

SemigroupEngine engine_for(const ProblemSpec& spec) { return SemigroupEngine::free_space(default_grid(spec, kGridM)); }

std::optional<SolveTrace> solve_monotone(const ProblemSpec& spec, const SemigroupEngine& engine) {
  const double C0 = measured_decay_constant(spec.N, spec.rho / spec.r);
  const auto t_adm = admissible_time(spec, kA, C0);
  if (!t_adm) return std::nullopt;
  const auto u0 = build_singular_data(spec, engine.grid());
  const auto pair = build_supersolution(spec, engine, u0, solver_time_grid(0.5 * *t_adm), kA, C0);
  if (!pair.verified) return std::nullopt;
  IterateOptions io;
  io.tol = kPicardTol;
  return monotone_iterate(spec, engine, u0, pair, io);
}

ProbeResult probe(const ProblemSpec& spec, const SemigroupEngine& engine) {
  return blowup_probe(spec, engine, build_singular_data(spec, engine.grid()), geometric_grid(1e-6, kProbeHorizon, 9));
}

void criterion_dichotomy(Outcome& o) {
  for (double rho : {0.25, 0.5, 0.75}) {
    const auto spec = cubic(rho);
    const auto engine = engine_for(spec);
    const auto tr = solve_monotone(spec, engine);
    const bool ok = tr && tr->status == SolveStatus::converged && std::isfinite(tr->C_meas);
    o.require(ok, "converged solve at rho=" + std::to_string(rho));
    if (ok) {
      o.note << " rho=" << rho << " C_meas=" << tr->C_meas << ";";
      g_converged.push_back({spec, *tr});
    }
  }
  for (double rho : {1.25, 1.5, 1.75}) {
    const auto spec = cubic(rho, Weight::one(), DataSide::lower);
    const auto p = probe(spec, engine_for(spec));
    o.require(p.applicable && p.violated, "Phi > 1 at rho=" + std::to_string(rho));
    o.note << " rho=" << rho << " Phi_max=" << p.Phi_max << ";";
  }
}

void criterion_weighted(Outcome& o) {
  const auto w = Weight::power(1.0);
  const auto up = cubic(1.5, w);
  const auto v = classify(up);
  o.require(v.existence == Existence::predicted, "existence predicted at rho=1.5, h=t");
  const auto engine = engine_for(up);
  const auto tr = solve_monotone(up, engine);
  const bool ok = tr && tr->status == SolveStatus::converged;
  o.require(ok, "converged solve at rho=1.5, h=t");
  if (ok) {
    o.note << " rho=1.5 " << v.applied_rule << " C_meas=" << tr->C_meas << ";";
    g_converged.push_back({up, *tr});
  }
  const auto lo = cubic(2.5, w, DataSide::lower);
  const auto p = probe(lo, engine_for(lo));
  o.require(p.applicable && p.violated, "Phi > 1 at rho=2.5, h=t");
  o.note << " rho=2.5 Phi_max=" << p.Phi_max << ";";
}

void criterion_smoothing(Outcome& o) {
  std::mt19937 rng(20241017);
  std::uniform_real_distribution<double> logt(std::log(1e-3), std::log(2.0)), q(1.0, 6.0), width(0.3, 3.0), u(0.0, 1.0);
  std::vector<SemigroupEngine> engines;
  for (int N = 1; N <= 3; ++N) engines.push_back(SemigroupEngine::free_space(RadialGrid::make(N, 10.0, 512)));
  double worst = 0.0;
  int passed = 0;
  for (int k = 0; k < 50; ++k) {
    const auto& e = engines[k % 3];
    const double w = width(rng), phase = 6.0 * u(rng);
    std::function<double(double)> f;
    switch (k % 3) {
      case 0:
        f = [=](double s) { return std::exp(-s * s / w) * (1.0 + 0.5 * std::cos(3.0 * s + phase)); };
        break;
      case 1:
        f = [=](double s) { return 1.0 / (1.0 + std::pow(s / w, 8)); };
        break;
      default:
        f = [=](double s) { return std::exp(-s * s / w) + 0.5 * std::exp(-(s - 2.0) * (s - 2.0) / (0.2 * w)); };
    }
    double q1 = q(rng), q2 = q(rng);
    if (q1 > q2) std::swap(q1, q2);
    if (k % 5 == 0) q1 = 1.0;
    if (k % 4 == 0) q2 = kInf;
    const auto chk = verify_smoothing(e, RadialFunction::sample(e.grid(), f), std::exp(logt(rng)), q1, q2, kSmoothingTol);
    worst = std::max(worst, chk.record.ratio);
    passed += chk.satisfied;
  }
  o.require(passed == 50, std::to_string(50 - passed) + " smoothing cases violated");
  const auto e = SemigroupEngine::free_space(RadialGrid::make(3, 8.0, 1024));
  const double t = 0.1, eps = 1e-3 * t;
  const auto bump = RadialFunction::sample(e.grid(), [&](double s) { return std::exp(-s * s / (4.0 * eps)); });
  const auto sat = verify_smoothing(e, bump, t, 1.0, kInf, kSmoothingTol);
  o.require(sat.satisfied && sat.lhs / sat.bound >= kSaturation, "1->inf constant saturated within 2%");
  o.note << " 50 cases, worst ratio=" << worst << "; bump saturation=" << sat.lhs / sat.bound;
}

void criterion_singular_decay(Outcome& o) {
  const auto e = SemigroupEngine::free_space(RadialGrid::make(3, 8.0, 1024));
  for (double gamma : {0.5, 1.0, 2.0}) {
    const auto coarse = estimate_singular_decay_constant(3, gamma, kInf, kInf, e, 13);
    const auto fine = estimate_singular_decay_constant(3, gamma, kInf, kInf, e, 20);
    o.require(std::abs(coarse.slope_hat + 0.5 * gamma) <= kSlopeTol, "slope at gamma=" + std::to_string(gamma));
    o.require(std::abs(fine.C0_hat / coarse.C0_hat - 1.0) <= kC0Stability, "C0 stability at gamma=" + std::to_string(gamma));
    o.note << " gamma=" << gamma << " slope=" << coarse.slope_hat << " C0=" << coarse.C0_hat << "/" << fine.C0_hat << ";";
  }
}

void criterion_lower_bounds(Outcome& o) {
  for (int N = 1; N <= 3; ++N) {
    const auto e = SemigroupEngine::dirichlet_ball(N, 4.0, 512);
    const auto chk = verify_lower_bounds(e, 1.0, N == 1 ? 0.5 : 1.0, {1e-4, 1e-3, 1e-2, 1e-1});
    bool positive = true;
    for (const auto& r : chk.rows) positive = positive && r.min_ratio_i > 0.0 && r.min_ratio_ii > 0.0;
    o.require(positive && chk.record.lhs <= kLowerSpread, "N=" + std::to_string(N));
    o.note << " N=" << N << " spread=" << chk.record.lhs << ";";
  }
}

void criterion_criteria_oracles(Outcome& o) {
  int agree = 0, total = 0;
  for (double rho : {0.3, 0.7, 1.1, 1.9, 2.7})
    for (double q : {1.5, 2.0, 3.0, 4.0, 6.0})
      for (double beta : {0.0, 1.0}) {
        const bool analytic = rho * (q - 1.0) / 2.0 < beta + 1.0;
        const auto chk = check_supersolution_integral(Nonlinearity::power(q), Weight::power(beta), 1.0, rho, kA, 1.0, 1.0);
        agree += chk.pass == analytic;
        ++total;
      }
  o.require(agree == total, "supersolution integral grid");
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> p_dist(1.2, 8.0), z_dist(0.05, 100.0);
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double p = p_dist(rng), z = z_dist(rng);
    const auto H = osgood_tail(Nonlinearity::power(p), z);
    const double rel = H.converged ? std::abs(H.value / (std::pow(z, 1.0 - p) / (p - 1.0)) - 1.0) : kInf;
    worst = std::max(worst, rel);
  }
  o.require(worst <= kOsgoodTol, "Osgood tail closed form");
  const double p_star = 5.0 / 3.0;
  const auto pw = growth_exponents(Nonlinearity::power(3.0), p_star);
  const auto ex = growth_exponents(Nonlinearity::exponential(1.0), p_star);
  const auto lp = growth_exponents(Nonlinearity::log_power(4.0, 2.0), p_star);
  const bool meta = pw.method == "exact" && ex.method == "exact" && lp.method == "exact" && pw.p_inf == 3.0 &&
                    pw.p_sup == 3.0 && !ex.p_inf && ex.p_sup && std::isinf(*ex.p_sup) && lp.p_inf == 4.0 &&
                    lp.p_sup == 4.0;
  o.require(meta, "exact growth metadata");
  o.note << " grid " << agree << "/" << total << "; Osgood worst rel=" << worst << "; metadata "
         << (meta ? "exact" : "wrong");
}

void criterion_solver_oracles(Outcome& o) {
  // Linear equation: u(t) = e^t S(t) u0 against the closed-form Gaussian flow.
  ProblemSpec lin;
  lin.f = Nonlinearity::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0});
  const auto engine = engine_for(lin);
  const auto u0 = RadialFunction::sample(engine.grid(), [](double s) { return std::exp(-s * s); });
  const auto t_adm = admissible_time(lin, 3.0, 1.0);
  double lin_err = kInf;
  if (t_adm) {
    const auto pair = build_supersolution(lin, engine, u0, solver_time_grid(0.5 * *t_adm), 3.0, 1.0);
    if (pair.verified) {
      const auto tr = monotone_iterate(lin, engine, u0, pair);
      if (tr.status == SolveStatus::converged) {
        lin_err = 0.0;
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
          const double t = tr.times[k];
          double err = 0.0, peak = 0.0;
          for (int i = 0; i < tr.snapshots[k].size(); ++i) {
            const double s = engine.grid()->nodes()[i];
            const double exact = std::exp(t) * std::pow(1.0 + 4.0 * t, -1.5) * std::exp(-s * s / (1.0 + 4.0 * t));
            err = std::max(err, std::abs(tr.snapshots[k][i] - exact));
            peak = std::max(peak, exact);
          }
          lin_err = std::max(lin_err, err / peak);
        }
      }
    }
  }
  o.require(lin_err <= kLinearTol, "linear oracle");

  const auto spec = cubic(0.5);
  const auto ce = engine_for(spec);
  const auto tr = solve_monotone(spec, ce);
  const bool conv = tr && tr->status == SolveStatus::converged;
  o.require(conv, "cubic run converged");
  if (conv) {
    o.require(tr->monotone_violation <= 0.0, "iterates non-increasing");
    o.require(tr->residual <= kResidualFactor * kPicardTol, "fixed-point residual");
    o.note << " residual=" << tr->residual << " monotone_violation=" << tr->monotone_violation << ";";
  }

  double jensen = -kInf;
  for (const auto& f : {Nonlinearity::power(2.0), Nonlinearity::exponential(1.0)})
    for (double w : {0.5, 2.0})
      for (double t : {1e-3, 0.05, 0.5}) {
        const auto u = RadialFunction::sample(ce.grid(), [&](double s) { return 1.5 * std::exp(-s * s / w); });
        const auto lhs = ce.apply(u, t).mapped([&](double x) { return f(x); });
        const auto rhs = ce.apply(u.mapped([&](double x) { return f(x); }), t);
        for (int i = 0; i < lhs.size(); ++i) jensen = std::max(jensen, lhs[i] - rhs[i]);
      }
  o.require(jensen <= kJensenSlack, "Jensen inequality");
  o.note << " linear rel err=" << lin_err << "; Jensen max excess=" << jensen;
}

void criterion_uniqueness(Outcome& o) {
  const auto odd = Nonlinearity::Extension::odd;
  for (double p : {2.0, 3.0}) {
    auto spec = cubic(0.5);
    spec.f = Nonlinearity::power(p, odd);
    auto pert = spec;
    pert.K = 1.01;
    const auto engine = engine_for(spec);
    const double C0 = measured_decay_constant(3, 0.5);
    const auto t_adm = admissible_time(pert, kA, C0);
    if (!t_adm) {
      o.require(false, "admissible time for p=" + std::to_string(p));
      continue;
    }
    const auto times = solver_time_grid(0.5 * *t_adm);
    const auto u0 = build_singular_data(spec, engine.grid());
    const auto v0 = build_singular_data(pert, engine.grid());
    const auto pu = build_supersolution(spec, engine, u0, times, kA, C0);
    const auto pv = build_supersolution(pert, engine, v0, times, kA, C0);
    if (!pu.verified || !pv.verified) {
      o.require(false, "supersolution for p=" + std::to_string(p));
      continue;
    }
    const auto u = monotone_iterate(spec, engine, u0, pu);
    const auto v = monotone_iterate(pert, engine, v0, pv);
    if (u.status != SolveStatus::converged || v.status != SolveStatus::converged) {
      o.require(false, "converged pair for p=" + std::to_string(p));
      continue;
    }
    const double C1 = kA * C0 * std::pow(pert.K, 1.0 / pert.r);
    const auto chk = gronwall_uniqueness_check(u, v, u0, v0, spec, C1);
    o.require(chk.applicable && chk.pass, "Gronwall bound for p=" + std::to_string(p));
    double worst = 0.0;
    for (std::size_t k = 0; k < chk.lhs_curve.size(); ++k) worst = std::max(worst, chk.lhs_curve[k] / chk.rhs_curve[k]);
    o.note << " p=" << p << " lhs/rhs max=" << worst << ";";
    if (p == 3.0)
      for (double hi : {5.0, 7.0}) {
        auto big = spec;
        big.f = Nonlinearity::power(hi, odd);
        const auto na = gronwall_uniqueness_check(u, v, u0, v0, big, C1);
        o.require(!na.applicable, "inapplicable for p=" + std::to_string(hi));
        o.note << " p=" << hi << " " << (na.applicable ? "applicable" : "inapplicable") << ";";
      }
  }
}

void criterion_consistency(Outcome& o) {
  o.require(!g_converged.empty(), "no converged runs available");
  double worst = 0.0;
  for (const auto& run : g_converged) {
    const auto engine = engine_for(run.spec);
    const auto p = blowup_probe(run.spec, engine, build_singular_data(run.spec, engine.grid()), run.trace.times);
    o.require(p.applicable, "probe applicable at rho=" + std::to_string(run.spec.rho));
    worst = std::max(worst, p.Phi_max);
  }
  o.require(worst <= kPhiCeiling, "Phi <= 1.05");
  o.note << " " << g_converged.size() << " runs, Phi max=" << worst;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;
    void (*run)(Outcome&);
  };
  const std::vector<Criterion> criteria{
      {1, "dichotomy", 300.0, criterion_dichotomy},
      {2, "weighted shift", 300.0, criterion_weighted},
      {3, "smoothing estimate", 30.0, criterion_smoothing},
      {4, "singular decay exponent", 60.0, criterion_singular_decay},
      {5, "lower bounds", 60.0, criterion_lower_bounds},
      {6, "criteria oracles", 30.0, criterion_criteria_oracles},
      {7, "solver oracles", 60.0, criterion_solver_oracles},
      {8, "uniqueness", 60.0, criterion_uniqueness},
      {9, "consistency", 300.0, criterion_consistency},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs <= c.budget, "runtime budget");
    failures += !o.pass;
    std::printf("criterion %d %s: %s (%.1f s of %.0f s)%s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs, c.budget,
                o.note.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

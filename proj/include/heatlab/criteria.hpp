#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heatlab/nonlinearity.hpp"
#include "heatlab/quadrature.hpp"
#include "heatlab/radial_field.hpp"
#include "heatlab/semigroup.hpp"

namespace heatlab {

struct CriticalValues {
  double p_star = 0.0;
  double rho_star = 0.0;
  double rho_star_weighted = 0.0;
};

/// p* = 1 + 2r/N, rho* = 2r/(q-1), weighted rho* = 2r(beta+1)/(q-1).
inline CriticalValues critical_values(int N, double r, double q, double beta = 0.0) {
  if (N < 1) throw std::invalid_argument("critical_values: N must be >= 1");
  if (!(r >= 1.0)) throw std::invalid_argument("critical_values: r must be >= 1");
  if (!(q > 1.0)) throw std::invalid_argument("critical_values: q must be > 1");
  if (!(beta > -1.0)) throw std::invalid_argument("critical_values: beta must be > -1");
  return {1.0 + 2.0 * r / N, 2.0 * r / (q - 1.0), 2.0 * r * (beta + 1.0) / (q - 1.0)};
}

/// One link of a verdict's evidence chain.
struct Certificate {
  std::string criterion;
  std::string rule;  ///< which decision rule the certificate feeds
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  bool heuristic = false;
  std::string detail;

  json to_json() const {
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json(x > 0 ? "inf" : "-inf"); };
    return {{"criterion", criterion}, {"rule", rule},           {"value", num(value)},
            {"threshold", num(threshold)}, {"pass", pass}, {"heuristic", heuristic}, {"detail", detail}};
  }
};

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

inline void require_weight_nonnegative(const Weight& h) {
  for (double t : {0.0, 1e-12, 1e-6, 1e-3, 1.0, 1e3})
    if (h(t) < 0.0) throw std::invalid_argument("weight is negative somewhere");
}

}  // namespace detail

struct IntegralCheck {
  bool pass = false;
  double integral_value = kInf;
  double tail_exponent = 0.0;
  Certificate certificate;
};

/// Growth conditions for existence with arbitrary nonnegative L^r data:
/// r > 1: limsup t^{-p*} f(t) < inf; r = 1: \int_1^inf s^{-p*} F(s) ds < inf.
inline IntegralCheck check_fujita_growth(const Nonlinearity& f, double r, int N) {
  if (!f.flags().nondecreasing) throw std::invalid_argument("check_fujita_growth: f must be nondecreasing");
  const double p_star = 1.0 + 2.0 * r / N;
  IntegralCheck out;
  out.certificate.criterion = r > 1.0 ? "growth_limsup" : "growth_integral";
  out.certificate.rule = "fujita_growth";
  out.certificate.threshold = p_star;
  if (r > 1.0) {
    const auto g = raw_growth(f);
    bool pass = false;
    if (g.method == "exact") {
      switch (f.family()) {
        case Nonlinearity::Family::power:
          pass = f.q() <= p_star;
          break;
        case Nonlinearity::Family::log_power:
          pass = f.q() < p_star;
          break;
        default:
          pass = false;
      }
    } else {
      pass = std::isfinite(g.slope) && g.slope <= p_star;
      out.certificate.heuristic = true;
    }
    out.pass = pass;
    out.integral_value = g.slope;
    out.tail_exponent = g.slope;
    out.certificate.value = g.slope;
    out.certificate.pass = pass;
    out.certificate.detail = "growth exponent " + detail::fmt(g.slope) + " vs p* = " + detail::fmt(p_star);
    return out;
  }
  const auto res = quad::integrate_to_infinity(
      [&](double s) { return std::pow(s, -p_star) * envelope_F(f, s, 1.0); }, 1.0);
  out.pass = res.converged;
  out.integral_value = res.value;
  out.tail_exponent = res.tail_exponent;
  out.certificate.value = res.value;
  out.certificate.pass = res.converged;
  out.certificate.detail = "tail exponent " + detail::fmt(res.tail_exponent);
  return out;
}

/// Classifies \int_1^inf s^{-(1+2r/rho)} h(c(s)) E(s) ds, the common shape of the
/// supersolution and uniqueness integrals, with c(s) = B^{2r/rho} s^{-2r/rho}.
template <class Envelope>
IntegralCheck classify_weighted_tail(const Weight& h, double r, double rho, double B, Envelope&& env,
                                     const std::string& criterion, const std::string& rule) {
  detail::require_weight_nonnegative(h);
  if (!(rho > 0.0)) throw std::invalid_argument(criterion + ": rho must be > 0");
  if (!(B > 0.0) || !std::isfinite(B)) throw std::invalid_argument(criterion + ": scale must be > 0");
  const double k = 2.0 * r / rho;
  const double Bk = std::pow(B, k);
  const auto res = quad::integrate_to_infinity(
      [&](double s) {
        const double e = env(s);
        if (e == 0.0) return 0.0;
        return std::pow(s, -(1.0 + k)) * h(Bk * std::pow(s, -k)) * e;
      },
      1.0);
  IntegralCheck out;
  out.pass = res.converged;
  out.integral_value = res.value;
  out.tail_exponent = res.tail_exponent;
  out.certificate.criterion = criterion;
  out.certificate.rule = rule;
  out.certificate.value = res.value;
  out.certificate.threshold = kInf;
  out.certificate.pass = res.converged;
  out.certificate.detail = "fitted tail exponent " + detail::fmt(res.tail_exponent) + " (converges below -1.05)";
  return out;
}

/// Integral condition making w = A S(t)|u0| a supersolution:
/// \int_1^inf s^{-(1+2r/rho)} h((A C0 K^{1/r})^{2r/rho} s^{-2r/rho}) G(s) ds < inf.
inline IntegralCheck check_supersolution_integral(const Nonlinearity& g, const Weight& h, double r, double rho,
                                                  double A, double C0, double K) {
  if (!(A > 1.0)) throw std::invalid_argument("check_supersolution_integral: A must be > 1");
  if (!(C0 > 0.0) || !(K > 0.0)) throw std::invalid_argument("check_supersolution_integral: C0, K must be > 0");
  const double B = A * C0 * std::pow(K, 1.0 / r);
  return classify_weighted_tail(
      h, r, rho, B, [&](double s) { return envelope_G(g, s); }, "supersolution_integral", "existence");
}

/// Integral condition for uniqueness in the class sup t^{rho/2r}||u||_inf <= C1:
/// \int_1^inf s^{-(1+2r/rho)} h((s/C1)^{-2r/rho}) L(s) ds < inf.
inline IntegralCheck check_uniqueness_integral(const Nonlinearity& g, const Weight& h, double r, double rho,
                                               double C1) {
  if (!(C1 > 0.0)) throw std::invalid_argument("check_uniqueness_integral: C1 must be > 0");
  if (!g.flags().zero_at_zero) throw std::invalid_argument("check_uniqueness_integral: requires g(0) = 0");
  return classify_weighted_tail(
      h, r, rho, C1, [&](double s) { return lipschitz_L(g, s); }, "uniqueness_integral", "uniqueness");
}

struct WeightBlowupCheck {
  bool holds = false;
  bool heuristic = false;
  double exponent = 0.0;  ///< rho (p_sup - 1 - eps) / 2r
  std::vector<double> samples;  ///< t^{-exponent} \int_0^t h at t = 10^-k, k = 1..8
  std::string exponent_detail;
  Certificate certificate;
};

/// limsup_{t->0} t^{-rho(p_sup-1-eps)/2r} \int_0^t h = inf. Exact for power
/// weights; otherwise sampled at t = 10^-k and accepted when the values keep
/// increasing through t = 10^-6..10^-8 with a negative log-log slope.
inline WeightBlowupCheck check_weight_blowup(const Weight& h, double r, double rho, double p_sup, double eps) {
  if (!std::isfinite(p_sup)) throw std::invalid_argument("check_weight_blowup: p_sup must be finite");
  if (!(eps > 0.0 && eps < p_sup - 1.0)) throw std::invalid_argument("check_weight_blowup: eps out of range");
  detail::require_weight_nonnegative(h);
  WeightBlowupCheck out;
  out.exponent = rho * (p_sup - 1.0 - eps) / (2.0 * r);
  for (int k = 1; k <= 8; ++k) {
    const double t = std::pow(10.0, -k);
    out.samples.push_back(std::pow(t, -out.exponent) * h.integral(t));
  }
  if (const auto beta = h.power_exponent()) {
    out.holds = *beta + 1.0 < out.exponent;
    out.exponent_detail = "beta + 1 = " + detail::fmt(*beta + 1.0) + " vs " + detail::fmt(out.exponent);
  } else {
    out.heuristic = true;
    bool increasing = true;
    for (std::size_t i = 1; i < out.samples.size(); ++i) increasing = increasing && out.samples[i] > out.samples[i - 1];
    const std::size_t n = out.samples.size();
    const double slope =
        (std::log(out.samples[n - 1]) - std::log(out.samples[n - 3])) / (std::log(1e-8) - std::log(1e-6));
    out.holds = increasing && std::isfinite(slope) && slope < -0.05;
    out.exponent_detail = "sampled log-log slope " + detail::fmt(slope);
  }
  out.certificate.criterion = "weight_blowup";
  out.certificate.rule = "nonexistence";
  out.certificate.value = out.exponent;
  out.certificate.threshold = h.power_exponent() ? *h.power_exponent() + 1.0 : 0.0;
  out.certificate.pass = out.holds;
  out.certificate.heuristic = out.heuristic;
  out.certificate.detail = "eps = " + detail::fmt(eps) + ", " + out.exponent_detail;
  return out;
}

// ---------------------------------------------------------------------------
// Classification

enum class Existence { predicted, excluded, inconclusive };
enum class Uniqueness { predicted, inconclusive };

inline std::string to_string(Existence e) {
  switch (e) {
    case Existence::predicted:
      return "predicted";
    case Existence::excluded:
      return "excluded";
    case Existence::inconclusive:
      return "inconclusive";
  }
  return "";
}
inline std::string to_string(Uniqueness u) { return u == Uniqueness::predicted ? "predicted" : "inconclusive"; }

/// Rule names used in verdicts.
namespace rules {
inline const std::string growth_existence = "existence/growth-exponent";
inline const std::string integral_existence = "existence/supersolution-integral";
inline const std::string growth_nonexistence = "nonexistence/growth-exponent";
inline const std::string weight_nonexistence = "nonexistence/weight-blowup";
inline const std::string lipschitz_uniqueness = "uniqueness/lipschitz-integral";
}  // namespace rules

struct Verdict {
  Existence existence = Existence::inconclusive;
  Uniqueness uniqueness = Uniqueness::inconclusive;
  std::string applied_rule = "none";
  std::string uniqueness_rule = "none";
  std::vector<Certificate> certificates;
  double p_star = 0.0;
  std::optional<double> rho_star;
  std::optional<double> rho_star_weighted;
  std::optional<double> C0;
  std::optional<double> C1;

  json to_json() const {
    json cv = {{"p_star", p_star},
               {"rho_star", rho_star ? json(*rho_star) : json(nullptr)},
               {"rho_star_weighted", rho_star_weighted ? json(*rho_star_weighted) : json(nullptr)}};
    json certs = json::array();
    for (const auto& c : certificates) certs.push_back(c.to_json());
    return {{"existence", to_string(existence)},
            {"uniqueness", to_string(uniqueness)},
            {"applied_rule", applied_rule},
            {"uniqueness_rule", uniqueness_rule},
            {"critical_values", cv},
            {"C0", C0 ? json(*C0) : json(nullptr)},
            {"C1", C1 ? json(*C1) : json(nullptr)},
            {"certificates", certs}};
  }
};

/// Measured sup-norm decay constant of S(t)(|x|^-gamma chi_{B_1}), computed on
/// a free-space grid (R = 8, M = 1024) and memoised per (N, gamma).
inline double measured_decay_constant(int N, double gamma) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, double> memo;
  {
    std::lock_guard<std::mutex> lock(mutex);
    const auto it = memo.find({N, gamma});
    if (it != memo.end()) return it->second;
  }
  const auto engine = SemigroupEngine::free_space(RadialGrid::make(N, 8.0, 1024, 3.0));
  const double c0 = estimate_singular_decay_constant(N, gamma, kInf, kInf, engine).C0_hat;
  std::lock_guard<std::mutex> lock(mutex);
  memo[{N, gamma}] = c0;
  return c0;
}

struct ClassifyOptions {
  double A = 2.0;
  /// C0(N, gamma) in ||S(t)|x|^-gamma chi||_inf <= C0 t^{-gamma/2}; measured by default.
  std::function<double(int, double)> decay_constant = measured_decay_constant;
};

/// Decision tree over the existence, non-existence and uniqueness rules.
inline Verdict classify(const ProblemSpec& spec, const ClassifyOptions& opt = {}) {
  spec.validate();
  if (!(opt.A > 1.0)) throw std::invalid_argument("classify: A must be > 1");
  const auto& f = spec.f;
  const auto& h = spec.h;
  const double r = spec.r, rho = spec.rho;
  const int N = spec.N;
  Verdict v;
  v.p_star = 1.0 + 2.0 * r / N;
  const auto& fl = f.flags();
  const bool convex_case = fl.convex_on_positives && fl.nondecreasing && fl.zero_at_zero;
  std::optional<GrowthExponents> ge;
  if (fl.nondecreasing) ge = growth_exponents(f, v.p_star);
  const bool heuristic = ge && ge->method != "exact";

  // Second critical value when the growth exponent is pinned down.
  if (ge && ge->p_inf && ge->p_sup && *ge->p_inf == *ge->p_sup && std::isfinite(*ge->p_inf)) {
    v.rho_star = 2.0 * r / (*ge->p_inf - 1.0);
    if (const auto beta = h.power_exponent()) v.rho_star_weighted = 2.0 * r * (*beta + 1.0) / (*ge->p_inf - 1.0);
  }

  auto C0 = [&]() {
    if (!v.C0) v.C0 = opt.decay_constant(N, rho / r);
    return *v.C0;
  };

  bool predicted = false, excluded = false;
  std::string existence_rule, exclusion_rule;

  if (spec.side == DataSide::upper || spec.side == DataSide::both) {
    if (h.is_one() && convex_case && ge && ge->p_inf) {
      const double threshold = 2.0 * r / (*ge->p_inf - 1.0);
      Certificate c{"rho_below_growth_threshold", rules::growth_existence, rho, threshold, rho < threshold,
                    heuristic, "rho < 2r/(p_inf - 1) with p_inf = " + detail::fmt(*ge->p_inf)};
      v.certificates.push_back(c);
      if (c.pass) predicted = true, existence_rule = rules::growth_existence;
    }
    if (!predicted && fl.nondecreasing && fl.zero_at_zero && fl.locally_lipschitz) {
      auto chk = check_supersolution_integral(f, h, r, rho, opt.A, C0(), spec.K);
      chk.certificate.rule = rules::integral_existence;
      v.certificates.push_back(chk.certificate);
      if (chk.pass) predicted = true, existence_rule = rules::integral_existence;
    }
  }

  if (spec.side == DataSide::lower || spec.side == DataSide::both) {
    if (h.is_one() && convex_case && ge && ge->p_sup) {
      const double threshold = std::isinf(*ge->p_sup) ? 0.0 : 2.0 * r / (*ge->p_sup - 1.0);
      Certificate c{"rho_above_growth_threshold", rules::growth_nonexistence, rho, threshold, threshold < rho,
                    heuristic, "2r/(p_sup - 1) < rho < N with p_sup = " + detail::fmt(*ge->p_sup)};
      v.certificates.push_back(c);
      if (c.pass) excluded = true, exclusion_rule = rules::growth_nonexistence;
    }
    if (!excluded && convex_case && ge && ge->p_sup && std::isfinite(*ge->p_sup)) {
      std::optional<Certificate> last;
      for (int k = 1; k <= 10; ++k) {
        const double eps = (*ge->p_sup - 1.0) * std::pow(2.0, -k);
        auto chk = check_weight_blowup(h, r, rho, *ge->p_sup, eps);
        chk.certificate.rule = rules::weight_nonexistence;
        chk.certificate.heuristic = chk.certificate.heuristic || heuristic;
        last = chk.certificate;
        if (chk.holds) {
          excluded = true;
          exclusion_rule = rules::weight_nonexistence;
          break;
        }
      }
      if (last) v.certificates.push_back(*last);
    }
  }

  if (predicted && excluded) {
    v.existence = Existence::inconclusive;
    v.applied_rule = "conflict";
    v.certificates.push_back({"rule_conflict", "none", 0.0, 0.0, false, true,
                              "existence and non-existence rules both fired; numerics are unreliable here"});
  } else if (predicted) {
    v.existence = Existence::predicted;
    v.applied_rule = existence_rule;
  } else if (excluded) {
    v.existence = Existence::excluded;
    v.applied_rule = exclusion_rule;
  }

  if (v.existence == Existence::predicted && fl.zero_at_zero && fl.locally_lipschitz) {
    v.C1 = opt.A * C0() * std::pow(spec.K, 1.0 / r);
    auto chk = check_uniqueness_integral(f, h, r, rho, *v.C1);
    chk.certificate.rule = rules::lipschitz_uniqueness;
    v.certificates.push_back(chk.certificate);
    if (chk.pass) {
      v.uniqueness = Uniqueness::predicted;
      v.uniqueness_rule = rules::lipschitz_uniqueness;
    }
  }
  if (v.certificates.empty())
    v.certificates.push_back({"no_rule_applicable", "none", 0.0, 0.0, false, false,
                              "hypotheses of every rule fail for this nonlinearity, weight and data side"});
  return v;
}

}  // namespace heatlab

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatlab/quadrature.hpp"

namespace heatlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Known asymptotic growth exponents of a nonlinearity.
/// p_inf unset means "does not exist"; p_sup may be +inf.
struct ExactExponents {
  std::optional<double> p_inf;
  double p_sup = 0.0;
};

/// A nonlinearity g on the real line, built from its restriction f to
/// [0, inf). Negative arguments follow `extension`: zero (g = 0 for t <= 0)
/// or odd (g(-t) = -g(t)).
class Nonlinearity {
 public:
  enum class Family { power, exponential, log_power, tabulated };
  enum class Extension { zero, odd };

  struct Flags {
    bool convex_on_positives = false;
    bool nondecreasing = false;
    bool zero_at_zero = false;
    bool locally_lipschitz = false;
  };

  /// f(t) = t^q.
  static Nonlinearity power(double q, Extension ext = Extension::zero) {
    if (!(q > 1.0)) throw std::invalid_argument("power nonlinearity requires q > 1");
    Nonlinearity n(Family::power, ext);
    n.q_ = q;
    n.flags_ = {true, true, true, true};
    n.exact_ = ExactExponents{q, q};
    return n;
  }

  /// f(t) = exp(alpha t) - 1.
  static Nonlinearity exponential(double alpha, Extension ext = Extension::zero) {
    if (!(alpha > 0.0)) throw std::invalid_argument("exponential nonlinearity requires alpha > 0");
    Nonlinearity n(Family::exponential, ext);
    n.alpha_ = alpha;
    n.flags_ = {true, true, true, true};
    n.exact_ = ExactExponents{std::nullopt, kInf};
    return n;
  }

  /// f(t) = (1 + t)^q [ln(1 + t)]^s.
  static Nonlinearity log_power(double q, double s, Extension ext = Extension::zero) {
    if (!(q > 1.0)) throw std::invalid_argument("log-power nonlinearity requires q > 1");
    if (!(s >= 1.0)) throw std::invalid_argument("log-power nonlinearity requires s >= 1");
    Nonlinearity n(Family::log_power, ext);
    n.q_ = q;
    n.s_ = s;
    n.flags_ = {true, true, true, true};
    n.exact_ = ExactExponents{q, q};
    return n;
  }

  /// Piecewise-linear f through (t_i, f_i), t_0 = 0, extended past the last
  /// node by the power law through the last two nodes.
  static Nonlinearity tabulated(std::vector<double> t, std::vector<double> f,
                                Extension ext = Extension::zero) {
    if (t.size() != f.size() || t.size() < 3)
      throw std::invalid_argument("tabulated nonlinearity needs >= 3 matching samples");
    if (t.front() != 0.0) throw std::invalid_argument("tabulated nonlinearity must start at t = 0");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1])) throw std::invalid_argument("tabulated abscissae must increase");
    for (double v : f)
      if (!std::isfinite(v)) throw std::invalid_argument("tabulated values must be finite");
    const std::size_t n = t.size();
    if (!(f[n - 1] > 0.0 && f[n - 2] > 0.0))
      throw std::invalid_argument("tabulated nonlinearity must be positive at its last two nodes");
    Nonlinearity g(Family::tabulated, ext);
    g.flags_.zero_at_zero = (f.front() == 0.0);
    g.flags_.locally_lipschitz = true;
    bool nondecreasing = true, convex = true;
    double prev_slope = -kInf;
    for (std::size_t i = 1; i < n; ++i) {
      const double slope = (f[i] - f[i - 1]) / (t[i] - t[i - 1]);
      if (slope < 0.0) nondecreasing = false;
      if (slope < prev_slope - 1e-12 * std::abs(prev_slope)) convex = false;
      prev_slope = slope;
    }
    g.tail_exponent_ = std::log(f[n - 1] / f[n - 2]) / std::log(t[n - 1] / t[n - 2]);
    // The power-law continuation must keep the slope from decreasing.
    const double tail_slope = g.tail_exponent_ * f[n - 1] / t[n - 1];
    if (tail_slope < prev_slope - 1e-12 * std::abs(prev_slope)) convex = false;
    if (g.tail_exponent_ < 0.0) nondecreasing = false;
    g.flags_.nondecreasing = nondecreasing;
    g.flags_.convex_on_positives = convex;
    g.table_t_ = std::move(t);
    g.table_f_ = std::move(f);
    return g;
  }

  Family family() const { return family_; }
  Extension extension() const { return extension_; }
  const Flags& flags() const { return flags_; }
  const std::optional<ExactExponents>& exact_exponents() const { return exact_; }
  double q() const { return q_; }
  double alpha() const { return alpha_; }
  double s() const { return s_; }
  const std::vector<double>& table_t() const { return table_t_; }
  const std::vector<double>& table_f() const { return table_f_; }

  /// Convex, nondecreasing positive part with f(0) = 0: f(t)/t is then
  /// nondecreasing, so the envelopes have closed forms.
  bool monotone_quotient() const {
    return family_ != Family::tabulated ||
           (flags_.convex_on_positives && flags_.nondecreasing && flags_.zero_at_zero);
  }

  /// f(t) for t >= 0.
  double positive(double t) const {
    if (t <= 0.0) return family_ == Family::tabulated ? table_f_.front() : 0.0;
    switch (family_) {
      case Family::power:
        return std::pow(t, q_);
      case Family::exponential:
        return std::expm1(alpha_ * t);
      case Family::log_power:
        return std::pow(1.0 + t, q_) * std::pow(std::log1p(t), s_);
      case Family::tabulated:
        return table_value(t);
    }
    return 0.0;
  }

  /// g(t) on the whole line.
  double operator()(double t) const {
    if (t > 0.0) return positive(t);
    if (t == 0.0) return positive(0.0);
    return extension_ == Extension::odd ? -positive(-t) : 0.0;
  }

  /// f'(t) for t >= 0 (right derivative for tabulated data).
  double positive_derivative(double t) const {
    t = std::max(t, 0.0);
    switch (family_) {
      case Family::power:
        return t == 0.0 ? 0.0 : q_ * std::pow(t, q_ - 1.0);
      case Family::exponential:
        return alpha_ * std::exp(alpha_ * t);
      case Family::log_power: {
        const double l = std::log1p(t);
        if (l == 0.0) return s_ == 1.0 ? 1.0 : 0.0;
        return std::pow(1.0 + t, q_ - 1.0) * std::pow(l, s_ - 1.0) * (q_ * l + s_);
      }
      case Family::tabulated: {
        const std::size_t n = table_t_.size();
        if (t >= table_t_[n - 1]) return tail_exponent_ * table_value(t) / t;
        const auto it = std::upper_bound(table_t_.begin(), table_t_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - table_t_.begin());
        return (table_f_[i] - table_f_[i - 1]) / (table_t_[i] - table_t_[i - 1]);
      }
    }
    return 0.0;
  }

  /// log f(t) for large t without overflow.
  double log_positive(double t) const {
    switch (family_) {
      case Family::power:
        return q_ * std::log(t);
      case Family::exponential: {
        const double x = alpha_ * t;
        return x + std::log1p(-std::exp(-x));
      }
      case Family::log_power:
        return q_ * std::log1p(t) + s_ * std::log(std::log1p(t));
      case Family::tabulated: {
        const std::size_t n = table_t_.size();
        if (t >= table_t_[n - 1])
          return std::log(table_f_[n - 1]) + tail_exponent_ * std::log(t / table_t_[n - 1]);
        return std::log(table_value(t));
      }
    }
    return 0.0;
  }

  /// Config-string form, e.g. "power:q=3".
  std::string label() const {
    std::ostringstream os;
    os.precision(17);
    switch (family_) {
      case Family::power:
        os << "power:q=" << q_;
        break;
      case Family::exponential:
        os << "exp:alpha=" << alpha_;
        break;
      case Family::log_power:
        os << "logpow:q=" << q_ << ",s=" << s_;
        break;
      case Family::tabulated:
        os << "tab:points=";
        for (std::size_t i = 0; i < table_t_.size(); ++i)
          os << (i ? ";" : "") << table_t_[i] << "/" << table_f_[i];
        break;
    }
    if (extension_ == Extension::odd) os << ",ext=odd";
    return os.str();
  }

 private:
  Nonlinearity(Family fam, Extension ext) : family_(fam), extension_(ext) {}

  double table_value(double t) const {
    const std::size_t n = table_t_.size();
    if (t >= table_t_[n - 1]) return table_f_[n - 1] * std::pow(t / table_t_[n - 1], tail_exponent_);
    const auto it = std::upper_bound(table_t_.begin(), table_t_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - table_t_.begin());
    const double w = (t - table_t_[i - 1]) / (table_t_[i] - table_t_[i - 1]);
    return (1.0 - w) * table_f_[i - 1] + w * table_f_[i];
  }

  Family family_;
  Extension extension_;
  Flags flags_;
  std::optional<ExactExponents> exact_;
  double q_ = 0.0, alpha_ = 0.0, s_ = 0.0;
  std::vector<double> table_t_, table_f_;
  double tail_exponent_ = 0.0;
};

/// Time weight h(t) >= 0 on [0, inf).
class Weight {
 public:
  enum class Kind { one, power, tabulated };

  static Weight one() { return Weight(Kind::one); }

  /// h(t) = t^beta, beta > -1.
  static Weight power(double beta) {
    if (!(beta > -1.0)) throw std::invalid_argument("power weight requires beta > -1");
    Weight w(Kind::power);
    w.beta_ = beta;
    return w;
  }

  /// Piecewise-linear samples, constant past the last node.
  static Weight tabulated(std::vector<double> t, std::vector<double> h) {
    if (t.size() != h.size() || t.size() < 2)
      throw std::invalid_argument("tabulated weight needs >= 2 matching samples");
    if (t.front() != 0.0) throw std::invalid_argument("tabulated weight must start at t = 0");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1])) throw std::invalid_argument("tabulated weight abscissae must increase");
    for (double v : h)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("weight must be nonnegative and finite");
    Weight w(Kind::tabulated);
    w.t_ = std::move(t);
    w.h_ = std::move(h);
    return w;
  }

  Kind kind() const { return kind_; }
  bool is_one() const { return kind_ == Kind::one || (kind_ == Kind::power && beta_ == 0.0); }
  /// Exponent of a power weight (0 for h = 1).
  std::optional<double> power_exponent() const {
    if (kind_ == Kind::one) return 0.0;
    if (kind_ == Kind::power) return beta_;
    return std::nullopt;
  }
  double beta() const { return beta_; }

  double operator()(double t) const {
    switch (kind_) {
      case Kind::one:
        return 1.0;
      case Kind::power:
        return beta_ == 0.0 ? 1.0 : std::pow(t, beta_);
      case Kind::tabulated: {
        if (t >= t_.back()) return h_.back();
        if (t <= 0.0) return h_.front();
        const auto it = std::upper_bound(t_.begin(), t_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - t_.begin());
        const double w = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
        return (1.0 - w) * h_[i - 1] + w * h_[i];
      }
    }
    return 0.0;
  }

  /// Integral of h over [0, t].
  double integral(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind_) {
      case Kind::one:
        return t;
      case Kind::power:
        return std::pow(t, beta_ + 1.0) / (beta_ + 1.0);
      case Kind::tabulated: {
        double acc = 0.0;
        for (std::size_t i = 1; i < t_.size(); ++i) {
          const double lo = t_[i - 1];
          if (lo >= t) break;
          const double hi = std::min(t_[i], t);
          acc += 0.5 * ((*this)(lo) + (*this)(hi)) * (hi - lo);
        }
        if (t > t_.back()) acc += h_.back() * (t - t_.back());
        return acc;
      }
    }
    return 0.0;
  }

  std::string label() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
      case Kind::one:
        return "one";
      case Kind::power:
        os << "weight:beta=" << beta_;
        return os.str();
      case Kind::tabulated:
        os << "weight:points=";
        for (std::size_t i = 0; i < t_.size(); ++i) os << (i ? ";" : "") << t_[i] << "/" << h_[i];
        return os.str();
    }
    return "";
  }

 private:
  explicit Weight(Kind k) : kind_(k) {}
  Kind kind_;
  double beta_ = 0.0;
  std::vector<double> t_, h_;
};

namespace detail {

inline std::map<std::string, std::string> parse_fields(const std::string& body) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t comma = body.find(',', pos);
    const std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) {
      const std::size_t eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("malformed field '" + item + "'");
      out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline double parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("field '" + key + "' is not a number: '" + text + "'");
  }
  if (used != text.size()) throw std::invalid_argument("field '" + key + "' has trailing characters");
  return v;
}

inline void parse_points(const std::string& text, std::vector<double>& xs, std::vector<double>& ys) {
  std::stringstream ss(text);
  std::string pair;
  while (std::getline(ss, pair, ';')) {
    const std::size_t slash = pair.find('/');
    if (slash == std::string::npos) throw std::invalid_argument("point '" + pair + "' must be t/value");
    xs.push_back(parse_number("points", pair.substr(0, slash)));
    ys.push_back(parse_number("points", pair.substr(slash + 1)));
  }
}

inline double require(const std::map<std::string, std::string>& fields, const std::string& key) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw std::invalid_argument("missing field '" + key + "'");
  return parse_number(key, it->second);
}

}  // namespace detail

/// Parses "power:q=3", "exp:alpha=1", "logpow:q=5,s=2" or
/// "tab:points=0/0;1/1;2/4", each optionally followed by ",ext=odd".
inline Nonlinearity parse_nonlinearity(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("nonlinearity '" + text + "' lacks 'family:'");
  const std::string family = text.substr(0, colon);
  auto fields = detail::parse_fields(text.substr(colon + 1));
  auto ext = Nonlinearity::Extension::zero;
  if (auto it = fields.find("ext"); it != fields.end()) {
    if (it->second == "odd")
      ext = Nonlinearity::Extension::odd;
    else if (it->second != "zero")
      throw std::invalid_argument("ext must be 'zero' or 'odd'");
    fields.erase(it);
  }
  auto expect = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : fields) {
      bool known = false;
      for (const char* key : keys) known = known || k == key;
      if (!known) throw std::invalid_argument("unknown field '" + k + "' for " + family);
    }
  };
  if (family == "power") {
    expect({"q"});
    return Nonlinearity::power(detail::require(fields, "q"), ext);
  }
  if (family == "exp") {
    expect({"alpha"});
    return Nonlinearity::exponential(detail::require(fields, "alpha"), ext);
  }
  if (family == "logpow") {
    expect({"q", "s"});
    return Nonlinearity::log_power(detail::require(fields, "q"), detail::require(fields, "s"), ext);
  }
  if (family == "tab") {
    expect({"points"});
    std::vector<double> t, f;
    if (!fields.count("points")) throw std::invalid_argument("missing field 'points'");
    detail::parse_points(fields.at("points"), t, f);
    return Nonlinearity::tabulated(std::move(t), std::move(f), ext);
  }
  throw std::invalid_argument("unknown nonlinearity family '" + family + "'");
}

/// Parses "one", "weight:beta=0.5" (also "beta=0.5") or
/// "weight:points=0/1;1/2".
inline Weight parse_weight(const std::string& text) {
  if (text == "one" || text == "1") return Weight::one();
  std::string body = text;
  if (body.rfind("weight:", 0) == 0) body = body.substr(7);
  const auto fields = detail::parse_fields(body);
  if (fields.size() != 1) throw std::invalid_argument("weight '" + text + "' must have exactly one field");
  if (fields.count("beta")) return Weight::power(detail::require(fields, "beta"));
  if (fields.count("points")) {
    std::vector<double> t, h;
    detail::parse_points(fields.at("points"), t, h);
    return Weight::tabulated(std::move(t), std::move(h));
  }
  throw std::invalid_argument("unknown weight '" + text + "'");
}

// ---------------------------------------------------------------------------
// Envelopes

namespace detail {

// Geometric sample of (0, s], densest near s, plus the table nodes.
inline std::vector<double> envelope_sample(const Nonlinearity& g, double lo, double s) {
  std::vector<double> pts;
  const int n = 400;
  const double floor = lo > 0.0 ? lo : s * 1e-12;
  const double ratio = std::pow(floor / s, 1.0 / n);
  for (int k = 0; k <= n; ++k) pts.push_back(s * std::pow(ratio, k));
  for (double t : g.table_t())
    if (t > 0.0 && t >= floor && t <= s) pts.push_back(t);
  return pts;
}

}  // namespace detail

/// G(s) = sup_{0<|t|<=s} g(t)/t, G(0) = 0.
inline double envelope_G(const Nonlinearity& g, double s) {
  if (s < 0.0) throw std::invalid_argument("envelope_G: s must be >= 0");
  if (!g.flags().zero_at_zero) throw std::invalid_argument("envelope_G: requires g(0) = 0");
  if (s == 0.0) return 0.0;
  if (g.family() != Nonlinearity::Family::tabulated) return g.positive(s) / s;
  double best = 0.0;
  for (double t : detail::envelope_sample(g, 0.0, s)) {
    best = std::max(best, g(t) / t);
    best = std::max(best, g(-t) / (-t));
  }
  return best;
}

/// sup f(t)/t over [lower, sigma]; lower = 0 means the half-open (0, sigma].
inline double envelope_F(const Nonlinearity& f, double sigma, double lower = 1.0) {
  if (lower < 0.0 || sigma < lower || (lower == 0.0 && sigma <= 0.0))
    throw std::invalid_argument("envelope_F: empty window");
  if (f.monotone_quotient()) return f.positive(sigma) / sigma;
  double best = 0.0;
  for (double t : detail::envelope_sample(f, lower, sigma)) best = std::max(best, f.positive(t) / t);
  return best;
}

/// L(s) = sup of difference quotients of g over [-s, s], L(0) = 0.
inline double lipschitz_L(const Nonlinearity& g, double s) {
  if (s < 0.0) throw std::invalid_argument("lipschitz_L: s must be >= 0");
  if (s == 0.0) return 0.0;
  if (g.family() != Nonlinearity::Family::tabulated) {
    // Convex nondecreasing positive part: g' peaks at t = s for both extensions.
    return g.positive_derivative(s);
  }
  // Piecewise linear up to the last node, then t^k with |g'| monotone, so the
  // sup of |g'| is a segment slope or a tail endpoint derivative.
  const auto& t = g.table_t();
  const auto& f = g.table_f();
  if (g.extension() == Nonlinearity::Extension::zero && f.front() != 0.0) return kInf;
  double best = 0.0;
  for (std::size_t i = 1; i < t.size() && t[i - 1] < s; ++i)
    best = std::max(best, std::abs((f[i] - f[i - 1]) / (t[i] - t[i - 1])));
  if (s > t.back()) {
    best = std::max(best, std::abs(g.positive_derivative(t.back())));
    best = std::max(best, std::abs(g.positive_derivative(s)));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Growth exponents

struct GrowthExponents {
  std::optional<double> p_inf;   ///< unset: does not exist
  std::optional<double> p_sup;   ///< unset: empty defining set; may be +inf
  std::string method;            ///< "exact" or "numeric-heuristic"
  double slope = 0.0;            ///< raw asymptotic log-log slope (numeric)
  double band = 0.0;             ///< half-spread of local slopes (numeric)
};

/// Raw exponents of f at infinity: either family metadata or a log-log fit.
inline GrowthExponents raw_growth(const Nonlinearity& f) {
  GrowthExponents out;
  if (f.exact_exponents()) {
    out.method = "exact";
    out.p_inf = f.exact_exponents()->p_inf;
    out.p_sup = f.exact_exponents()->p_sup;
    out.slope = out.p_inf.value_or(kInf);
    return out;
  }
  out.method = "numeric-heuristic";
  std::vector<double> x, y;
  for (int k = 20; k <= 60; ++k) {
    const double t = std::ldexp(1.0, k);
    x.push_back(std::log(t));
    y.push_back(f.log_positive(t));
  }
  auto fit = [&](std::size_t lo, std::size_t hi) {
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    return sxy / sxx;
  };
  const std::size_t n = x.size();
  out.slope = fit(0, n);
  const double first = fit(0, n / 2), second = fit(n / 2, n);
  out.band = 0.5 * std::abs(second - first);
  if (!std::isfinite(out.slope) || out.slope > 1e3 || second > 1.5 * first + 1.0) {
    out.p_inf = std::nullopt;
    out.p_sup = kInf;
    out.slope = kInf;
  } else {
    out.p_inf = out.slope;
    out.p_sup = out.slope;
  }
  return out;
}

/// p_inf = inf{p > p*: limsup t^-p f(t) < inf},
/// p_sup = sup{p > p*: liminf t^-p f(t) > 0}.
inline GrowthExponents growth_exponents(const Nonlinearity& f, double p_star) {
  if (!f.flags().nondecreasing) throw std::invalid_argument("growth_exponents: f must be nondecreasing");
  GrowthExponents raw = raw_growth(f);
  GrowthExponents out = raw;
  // Polynomial growth q: limsup finite for every p > max(q, p*), so the
  // infimum is max(q, p*); liminf positive only for p <= q.
  if (raw.p_inf) out.p_inf = std::max(*raw.p_inf, p_star);
  if (raw.p_sup && !(*raw.p_sup > p_star)) out.p_sup = std::nullopt;
  return out;
}

// ---------------------------------------------------------------------------
// Osgood tail

struct OsgoodTail {
  double value = kInf;
  bool converged = false;
  double tail_exponent = 0.0;
};

/// H(z) = integral of 1/f over [z, inf).
inline OsgoodTail osgood_tail(const Nonlinearity& f, double z, const quad::TailOptions& opt = {}) {
  if (!(z > 0.0) || !(f.positive(z) > 0.0))
    throw std::invalid_argument("osgood_tail: f must be positive on [z, inf)");
  const auto res = quad::integrate_to_infinity([&](double s) { return 1.0 / f.positive(s); }, z, opt);
  return {res.value, res.converged, res.tail_exponent};
}

}  // namespace heatlab

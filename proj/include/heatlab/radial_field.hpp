#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatlab/nonlinearity.hpp"
#include "heatlab/quadrature.hpp"

namespace heatlab {

/// Surface area of the unit sphere in R^N (2 for N = 1).
inline double sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

/// Graded radial grid r_i = R (i/M)^grade, i = 1..M. The origin is not a node.
class RadialGrid {
 public:
  RadialGrid(int N, double R, int M, double grade = 3.0) : N_(N), R_(R), grade_(grade) {
    if (N < 1 || N > 3) throw std::invalid_argument("RadialGrid: N must be 1, 2 or 3");
    if (!(R > 0.0)) throw std::invalid_argument("RadialGrid: R must be > 0");
    if (M < 2) throw std::invalid_argument("RadialGrid: M must be >= 2");
    if (!(grade >= 1.0)) throw std::invalid_argument("RadialGrid: grading exponent must be >= 1");
    nodes_.resize(M);
    for (int i = 1; i <= M; ++i) nodes_[i - 1] = R * std::pow(static_cast<double>(i) / M, grade);
    nodes_.back() = R;
  }

  static std::shared_ptr<const RadialGrid> make(int N, double R, int M, double grade = 3.0) {
    return std::make_shared<const RadialGrid>(N, R, M, grade);
  }

  int dimension() const { return N_; }
  double max_radius() const { return R_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  double grade() const { return grade_; }
  const std::vector<double>& nodes() const { return nodes_; }
  double operator[](int i) const { return nodes_[i]; }

  /// Index of the last node <= s, or -1 when s < r_1.
  int locate(double s) const {
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
    return static_cast<int>(it - nodes_.begin()) - 1;
  }

  bool same_as(const RadialGrid& o) const {
    return N_ == o.N_ && R_ == o.R_ && grade_ == o.grade_ && nodes_ == o.nodes_;
  }

 private:
  int N_;
  double R_;
  double grade_;
  std::vector<double> nodes_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Radial profile sampled at grid nodes.
///
/// Between nodes the profile is s^-gamma times the linear interpolant of
/// w_i = v_i r_i^gamma, so exact power data is reproduced. On (0, r_1] it is
/// v_1 (s / r_1)^-gamma. With a support radius a the profile vanishes past a,
/// and on the cell holding a it is w_j s^-gamma up to a.
class RadialFunction {
 public:
  RadialFunction(GridPtr grid, std::vector<double> values, double singular_power = 0.0,
                 std::optional<double> support_radius = std::nullopt)
      : grid_(std::move(grid)), values_(std::move(values)), gamma_(singular_power), support_(support_radius) {
    if (!grid_) throw std::invalid_argument("RadialFunction: null grid");
    if (static_cast<int>(values_.size()) != grid_->size())
      throw std::invalid_argument("RadialFunction: value count does not match grid");
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("RadialFunction: non-finite value");
    if (!(gamma_ >= 0.0)) throw std::invalid_argument("RadialFunction: singular power must be >= 0");
    if (gamma_ > 0.0 && !(gamma_ < grid_->dimension()))
      throw std::invalid_argument("RadialFunction: singular power must be < N");
    if (support_) {
      if (!(*support_ > 0.0) || *support_ > grid_->max_radius())
        throw std::invalid_argument("RadialFunction: support radius must lie in (0, R]");
      const auto& r = grid_->nodes();
      for (std::size_t i = 0; i < values_.size(); ++i)
        if (r[i] > *support_) values_[i] = 0.0;
    }
  }

  static RadialFunction zero(GridPtr grid) {
    const int M = grid->size();
    return RadialFunction(std::move(grid), std::vector<double>(M, 0.0));
  }

  /// Samples fn at the nodes.
  template <class F>
  static RadialFunction sample(GridPtr grid, F&& fn, double singular_power = 0.0,
                               std::optional<double> support_radius = std::nullopt) {
    std::vector<double> v(grid->size());
    for (int i = 0; i < grid->size(); ++i) v[i] = fn((*grid)[i]);
    return RadialFunction(std::move(grid), std::move(v), singular_power, support_radius);
  }

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double singular_power() const { return gamma_; }
  const std::optional<double>& support_radius() const { return support_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }

  /// Effective outer edge of the profile.
  double outer_radius() const { return support_ ? *support_ : grid_->max_radius(); }

  /// w_i = v_i r_i^gamma.
  std::vector<double> reduced_values() const {
    if (gamma_ == 0.0) return values_;
    std::vector<double> w(values_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = values_[i] * std::pow(grid_->nodes()[i], gamma_);
    return w;
  }

  /// Interpolated value at radius s > 0.
  double at(double s) const {
    const auto& r = grid_->nodes();
    if (s > outer_radius()) return 0.0;
    if (s <= r[0]) return gamma_ == 0.0 ? values_[0] : values_[0] * std::pow(s / r[0], -gamma_);
    const int j = grid_->locate(s);
    if (j + 1 >= size()) return values_.back();
    const double wj = values_[j] * std::pow(r[j], gamma_);
    if (r[j + 1] > outer_radius()) return wj * std::pow(s, -gamma_);
    const double wk = values_[j + 1] * std::pow(r[j + 1], gamma_);
    const double lam = (s - r[j]) / (r[j + 1] - r[j]);
    return ((1.0 - lam) * wj + lam * wk) * std::pow(s, -gamma_);
  }

  RadialFunction scaled(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return RadialFunction(grid_, std::move(v), gamma_, support_);
  }

  template <class F>
  RadialFunction mapped(F&& fn) const {
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(values_[i]);
    return RadialFunction(grid_, std::move(v), gamma_, support_);
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
  double gamma_;
  std::optional<double> support_;
};

namespace detail {

inline void require_same_grid(const RadialFunction& a, const RadialFunction& b) {
  if (a.grid_ptr() != b.grid_ptr() && !a.grid().same_as(b.grid()))
    throw std::invalid_argument("radial functions live on different grids");
}

// Integral of |w(s)|^p s^(N-1-gamma p) over [lo, hi] with w linear through
// (x0, w0), (x1, w1): 8-point Gauss-Legendre in log s.
inline double cell_power_integral(double lo, double hi, double x0, double w0, double x1, double w1,
                                  double gamma, double p, int N) {
  const auto& rule = quad::gauss_legendre_cached<8>();
  const double ul = std::log(lo), uh = std::log(hi);
  const double half = 0.5 * (uh - ul), mid = 0.5 * (uh + ul);
  const double expo = N - gamma * p;
  double acc = 0.0;
  for (int k = 0; k < 8; ++k) {
    const double u = mid + half * rule.nodes[k];
    const double s = std::exp(u);
    const double lam = x1 == x0 ? 0.0 : (s - x0) / (x1 - x0);
    const double w = std::abs((1.0 - lam) * w0 + lam * w1);
    if (w == 0.0) continue;
    acc += rule.weights[k] * std::exp(p * std::log(w) + expo * u);
  }
  return acc * half;
}

}  // namespace detail

/// L^p norm (p >= 1 or p = inf) of a radial profile on R^N.
inline double radial_norm(const RadialFunction& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("radial_norm: p must be >= 1");
  const auto& r = f.grid().nodes();
  const int M = f.size();
  const int N = f.grid().dimension();
  const double gamma = f.singular_power();
  const auto& v = f.values();
  if (std::isinf(p)) {
    if (gamma > 0.0 && v[0] != 0.0) return kInf;
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double total = 0.0;
  // (0, r_1]: |v_1|^p r_1^(gamma p) \int_0^{r_1} s^(N-1-gamma p) ds.
  if (v[0] != 0.0) {
    if (gamma * p >= N) return kInf;
    total += std::pow(std::abs(v[0]), p) * std::pow(r[0], N) / (N - gamma * p);
  }
  const double edge = f.outer_radius();
  const auto w = f.reduced_values();
  // Sub-split cells with a large radius ratio so the log-variable rule stays exact.
  auto add_cell = [&](double lo, double hi, double x0, double w0, double x1, double w1) {
    const int pieces = std::max(1, static_cast<int>(std::ceil(std::log(hi / lo) / std::log(1.5))));
    const double ratio = std::pow(hi / lo, 1.0 / pieces);
    double a = lo;
    for (int k = 0; k < pieces; ++k) {
      const double b = (k + 1 == pieces) ? hi : a * ratio;
      total += detail::cell_power_integral(a, b, x0, w0, x1, w1, gamma, p, N);
      a = b;
    }
  };
  for (int j = 0; j + 1 < M; ++j) {
    if (r[j] >= edge) break;
    if (w[j] == 0.0 && w[j + 1] == 0.0) continue;
    if (r[j + 1] > edge)
      add_cell(r[j], edge, r[j], w[j], r[j], w[j]);
    else
      add_cell(r[j], r[j + 1], r[j], w[j], r[j + 1], w[j + 1]);
  }
  return std::pow(sphere_area(N) * total, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Problem specification

enum class DomainKind { whole_space, dirichlet_ball };
enum class DataSide { upper, lower, both };

inline std::string to_string(DomainKind d) { return d == DomainKind::whole_space ? "whole_space" : "dirichlet_ball"; }
inline std::string to_string(DataSide s) {
  switch (s) {
    case DataSide::upper:
      return "upper";
    case DataSide::lower:
      return "lower";
    case DataSide::both:
      return "both";
  }
  return "";
}
inline DataSide parse_side(const std::string& s) {
  if (s == "upper" || s == "upper_class") return DataSide::upper;
  if (s == "lower" || s == "lower_class") return DataSide::lower;
  if (s == "both") return DataSide::both;
  throw std::invalid_argument("side must be upper, lower or both");
}

struct ProblemSpec {
  int N = 3;
  double r = 1.0;
  double rho = 0.5;
  double K = 1.0;
  double a = 1.0;
  DomainKind domain = DomainKind::whole_space;
  double ball_radius = 4.0;  ///< used when domain is a Dirichlet ball
  Nonlinearity f = Nonlinearity::power(3.0);
  Weight h = Weight::one();
  DataSide side = DataSide::upper;

  void validate() const {
    if (N < 1 || N > 3) throw std::invalid_argument("N must be 1, 2 or 3");
    if (!(r >= 1.0) || !std::isfinite(r)) throw std::invalid_argument("r must be a finite exponent >= 1");
    if (!(rho > 0.0 && rho < N)) throw std::invalid_argument("rho must lie in (0, N)");
    if (!(K > 0.0) || !std::isfinite(K)) throw std::invalid_argument("K must be > 0");
    if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("a must be > 0");
    if (domain == DomainKind::dirichlet_ball && a > ball_radius)
      throw std::invalid_argument("support radius a exceeds the ball radius");
  }

  /// Truncation / domain radius for numerics.
  double domain_radius() const { return domain == DomainKind::dirichlet_ball ? ball_radius : 8.0 * a; }
};

/// K^(1/r) s^(-rho/r) on (0, a], zero beyond.
inline RadialFunction build_singular_data(const ProblemSpec& spec, GridPtr grid) {
  if (!(spec.rho > 0.0)) throw std::invalid_argument("build_singular_data: rho must be > 0");
  if (!(spec.rho < spec.N)) throw std::invalid_argument("build_singular_data: rho >= N, data not in L^r");
  if (!(spec.K > 0.0)) throw std::invalid_argument("build_singular_data: K must be > 0");
  if (spec.a > grid->max_radius()) throw std::invalid_argument("build_singular_data: a exceeds grid radius");
  if (grid->dimension() != spec.N) throw std::invalid_argument("build_singular_data: grid dimension mismatch");
  const double amp = std::pow(spec.K, 1.0 / spec.r);
  const double gamma = spec.rho / spec.r;
  return RadialFunction::sample(
      std::move(grid), [&](double s) { return s <= spec.a ? amp * std::pow(s, -gamma) : 0.0; }, gamma, spec.a);
}

/// Default grid for a spec: R = 8a (whole space) or the ball radius, with
/// a landing on a node when possible.
inline GridPtr default_grid(const ProblemSpec& spec, int M = 1024, double grade = 3.0) {
  return RadialGrid::make(spec.N, spec.domain_radius(), M, grade);
}

struct ClassWitness {
  bool member = false;
  double K = 0.0;
  double a = 0.0;
};

struct ClassMembership {
  ClassWitness upper;
  ClassWitness lower;
};

/// Node-wise membership in the upper class (|x|^rho f^r <= K chi_a) and the
/// lower class (|x|^rho f^r >= K chi_a).
inline ClassMembership class_membership(const RadialFunction& f, double rho, double r) {
  const int N = f.grid().dimension();
  if (!(rho > 0.0 && rho < N)) throw std::invalid_argument("class_membership: rho must lie in (0, N)");
  if (!(r >= 1.0)) throw std::invalid_argument("class_membership: r must be >= 1");
  for (double v : f.values())
    if (v < 0.0) throw std::invalid_argument("class_membership: negative value");
  const auto& x = f.grid().nodes();
  const int M = f.size();
  // Declared singularity stronger than s^(-rho/r) makes the upper bound fail.
  const double gamma = f.singular_power();
  ClassMembership out;

  double sup = 0.0;
  double support = 0.0;
  for (int i = 0; i < M; ++i) {
    const double m = std::pow(x[i], rho) * std::pow(f[i], r);
    if (f[i] > 0.0) support = x[i];
    sup = std::max(sup, m);
  }
  if (f.support_radius() && support > 0.0) support = std::min(*f.support_radius(), f.grid().max_radius());
  const bool upper_singularity_ok = !(gamma * r > rho * (1.0 + 1e-12)) || f[0] == 0.0;
  out.upper.member = sup > 0.0 && std::isfinite(sup) && upper_singularity_ok;
  if (out.upper.member) {
    out.upper.K = sup;
    out.upper.a = support;
  }

  // Lower class: the running infimum from the origin outwards stays positive;
  // report the largest radius a' keeping it positive and its infimum.
  // Near the origin the profile behaves like s^(-gamma); with gamma r < rho the
  // product s^rho f^r tends to zero and no positive lower bound exists.
  double inf = kInf;
  int last = -1;
  for (int i = 0; i < M; ++i) {
    const double m = std::pow(x[i], rho) * std::pow(f[i], r);
    if (!(m > 0.0)) break;
    inf = std::min(inf, m);
    last = i;
  }
  if (gamma * r < rho * (1.0 - 1e-12)) {
    out.lower.member = false;
  } else if (last >= 0) {
    out.lower.member = true;
    out.lower.K = inf;
    out.lower.a = x[last];
    if (f.support_radius() && last == M - 1) out.lower.a = std::min(out.lower.a, *f.support_radius());
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

/// Writes "# N=.. singular_power=.. support_radius=.. R=.. grade=.." then
/// "radius,value" rows.
inline void write_csv(std::ostream& os, const RadialFunction& f) {
  os.precision(17);
  os << "# N=" << f.grid().dimension() << " singular_power=" << f.singular_power() << " support_radius=";
  if (f.support_radius())
    os << *f.support_radius();
  else
    os << "none";
  os << " R=" << f.grid().max_radius() << " grade=" << f.grid().grade() << "\n";
  os << "radius,value\n";
  for (int i = 0; i < f.size(); ++i) os << f.grid()[i] << "," << f[i] << "\n";
}

inline RadialFunction read_csv(std::istream& is) {
  std::string line;
  int N = 0;
  double gamma = 0.0, R = 0.0, grade = 3.0;
  std::optional<double> support;
  std::vector<double> radii, values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "N") N = std::stoi(val);
        else if (key == "singular_power") gamma = std::stod(val);
        else if (key == "support_radius" && val != "none") support = std::stod(val);
        else if (key == "R") R = std::stod(val);
        else if (key == "grade") grade = std::stod(val);
      }
      continue;
    }
    if (line.rfind("radius", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("read_csv: malformed row '" + line + "'");
    radii.push_back(std::stod(line.substr(0, comma)));
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  if (N == 0 || radii.empty()) throw std::invalid_argument("read_csv: missing header or rows");
  if (R == 0.0) R = radii.back();
  auto grid = RadialGrid::make(N, R, static_cast<int>(radii.size()), grade);
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (std::abs(radii[i] - (*grid)[static_cast<int>(i)]) > 1e-12 * R)
      throw std::invalid_argument("read_csv: radii do not match a graded grid");
  return RadialFunction(grid, std::move(values), gamma, support);
}

}  // namespace heatlab

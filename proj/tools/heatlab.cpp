// Command-line front end: classification, rho sweeps, solver runs, blow-up
// probes and the semigroup estimate battery.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heatlab/heatlab.hpp"

using namespace heatlab;

namespace {

constexpr int kExitPredicted = 0;
constexpr int kExitExcluded = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitInvalid = 3;

struct Config {
  int N = 3;
  double r = 1.0;
  double rho = 0.5;
  double K = 1.0;
  double a = 1.0;
  std::string f = "power:q=3";
  std::string h = "one";
  std::string side;  // command default when empty
  double A = 2.0;
  double tol = 1e-6;
  int grid_M = 256;
  double T = 0.0;  // 0: command default
  int steps = 160;
  std::string out;
  std::string rho_list = "0.25,0.5,0.75,1.25,1.5,1.75";
  std::string method = "monotone";
  std::string only;
  bool inject_fault = false;
  bool explain = false;
  bool timings = false;
  bool print_config = false;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json num(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw std::invalid_argument("bad list entry '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string default_side(const std::string& command) {
  if (command == "probe") return "lower";
  if (command == "sweep-rho") return "both";
  return "upper";
}

ProblemSpec make_spec(const Config& c, const std::string& command) {
  ProblemSpec s;
  s.N = c.N;
  s.r = c.r;
  s.rho = c.rho;
  s.K = c.K;
  s.a = c.a;
  s.f = parse_nonlinearity(c.f);
  s.h = parse_weight(c.h);
  s.side = parse_side(c.side.empty() ? default_side(command) : c.side);
  s.validate();
  if (!(c.A > 1.0)) throw std::invalid_argument("A must be > 1");
  if (!(c.tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (c.grid_M < 16) throw std::invalid_argument("grid-M must be >= 16");
  if (c.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (c.T < 0.0) throw std::invalid_argument("T must be >= 0");
  return s;
}

json spec_json(const ProblemSpec& s, const Config& c) {
  return {{"N", s.N},     {"r", s.r},   {"rho", s.rho},          {"K", s.K},
          {"a", s.a},     {"f", s.f.label()}, {"h", s.h.label()}, {"side", to_string(s.side)},
          {"A", c.A},     {"tol", c.tol}, {"grid_M", c.grid_M},  {"steps", c.steps},
          {"T", c.T}};
}

void print_config(const Config& c, std::ostream& os) {
  os << "N=" << c.N << "\nr=" << c.r << "\nrho=" << c.rho << "\nK=" << c.K << "\na=" << c.a << "\nf=" << c.f
     << "\nh=" << c.h << "\nside=" << (c.side.empty() ? "(command default)" : c.side) << "\nA=" << c.A
     << "\ntol=" << c.tol << "\ngrid-M=" << c.grid_M << "\nT=" << c.T << "\nsteps=" << c.steps
     << "\nout=" << c.out << "\nrho-list=" << c.rho_list << "\nmethod=" << c.method << "\nonly=" << c.only
     << "\n";
}

void explain(const std::vector<Certificate>& certs, std::ostream& os) {
  os << "certificate chain:\n";
  for (const auto& c : certs) {
    os << "  [" << (c.pass ? "pass" : "fail") << "] " << c.rule << " :: " << c.criterion << " value=" << c.value
       << " threshold=" << c.threshold << (c.heuristic ? " (heuristic)" : "") << "\n      " << c.detail << "\n";
  }
}

json certificates_json(const std::vector<Certificate>& certs) {
  json a = json::array();
  for (const auto& c : certs) a.push_back(c.to_json());
  return a;
}

void emit(const json& report, const Config& c, const std::string& name) {
  std::cout << report.dump(2) << "\n";
  if (!c.out.empty()) {
    std::filesystem::create_directories(c.out);
    std::ofstream(std::filesystem::path(c.out) / (name + ".json")) << report.dump(2) << "\n";
  }
}

json make_report(const std::string& command, const json& spec, const json& result, const json& certs,
                 const Config& c, Clock::time_point t0) {
  json timings = json::object();
  if (c.timings) timings["total_seconds"] = seconds_since(t0);
  return {{"command", command}, {"spec", spec}, {"result", result}, {"certificates", certs}, {"timings", timings}};
}

int exit_for(Existence e) {
  switch (e) {
    case Existence::predicted:
      return kExitPredicted;
    case Existence::excluded:
      return kExitExcluded;
    default:
      return kExitInconclusive;
  }
}

// ---------------------------------------------------------------------------

int run_classify(const Config& c) {
  const auto t0 = Clock::now();
  const auto spec = make_spec(c, "classify");
  ClassifyOptions opt;
  opt.A = c.A;
  const auto v = classify(spec, opt);
  if (c.explain) explain(v.certificates, std::cerr);
  emit(make_report("classify", spec_json(spec, c), v.to_json(), certificates_json(v.certificates), c, t0), c,
       "classify");
  return exit_for(v.existence);
}

int run_criteria(const Config& c) {
  const auto t0 = Clock::now();
  const auto spec = make_spec(c, "criteria");
  json result;
  std::vector<Certificate> certs;
  const double p_star = 1.0 + 2.0 * spec.r / spec.N;
  result["p_star"] = p_star;
  if (spec.f.family() == Nonlinearity::Family::power) {
    const double beta = spec.h.power_exponent().value_or(0.0);
    const auto cv = critical_values(spec.N, spec.r, spec.f.q(), beta);
    result["rho_star"] = cv.rho_star;
    result["rho_star_weighted"] = spec.h.power_exponent() ? json(cv.rho_star_weighted) : json(nullptr);
  }
  const auto& fl = spec.f.flags();
  if (fl.nondecreasing) {
    const auto ge = growth_exponents(spec.f, p_star);
    result["growth"] = {{"p_inf", ge.p_inf ? num(*ge.p_inf) : json(nullptr)},
                        {"p_sup", ge.p_sup ? num(*ge.p_sup) : json(nullptr)},
                        {"method", ge.method}};
    certs.push_back(check_fujita_growth(spec.f, spec.r, spec.N).certificate);
    if (ge.p_sup && std::isfinite(*ge.p_sup))
      certs.push_back(
          check_weight_blowup(spec.h, spec.r, spec.rho, *ge.p_sup, 0.5 * (*ge.p_sup - 1.0)).certificate);
  }
  if (fl.zero_at_zero && fl.nondecreasing) {
    const double C0 = measured_decay_constant(spec.N, spec.rho / spec.r);
    result["C0"] = C0;
    certs.push_back(check_supersolution_integral(spec.f, spec.h, spec.r, spec.rho, c.A, C0, spec.K).certificate);
    const double C1 = c.A * C0 * std::pow(spec.K, 1.0 / spec.r);
    result["C1"] = C1;
    certs.push_back(check_uniqueness_integral(spec.f, spec.h, spec.r, spec.rho, C1).certificate);
  }
  if (c.explain) explain(certs, std::cerr);
  emit(make_report("criteria", spec_json(spec, c), result, certificates_json(certs), c, t0), c, "criteria");
  return 0;
}

struct SolveOutcome {
  json result;
  std::optional<SolveTrace> trace;
  int code = kExitInconclusive;
};

SolveOutcome solve_once(const ProblemSpec& spec, const Config& c) {
  SolveOutcome out;
  const auto grid = default_grid(spec, c.grid_M);
  const auto engine = SemigroupEngine::free_space(grid);
  const auto u0 = build_singular_data(spec, grid);
  if (c.method == "direct") {
    const double T = c.T > 0.0 ? c.T : 1e-2;
    auto tr = direct_mild_solve(spec, engine, u0, solver_time_grid(T, c.steps));
    out.result = {{"trace", tr.header()}, {"T", T}};
    out.code = tr.status == SolveStatus::converged ? 0 : 1;
    out.trace = std::move(tr);
    return out;
  }
  if (c.method != "monotone") throw std::invalid_argument("method must be monotone or direct");
  const double C0 = measured_decay_constant(spec.N, spec.rho / spec.r);
  const auto t_adm = admissible_time(spec, c.A, C0);
  out.result["C0"] = C0;
  out.result["T_admissible"] = t_adm ? json(*t_adm) : json(nullptr);
  if (!t_adm) {
    out.result["error"] = "no admissible time: the supersolution margin exceeds 1 for every t";
    return out;
  }
  const double T = c.T > 0.0 ? c.T : 0.5 * *t_adm;
  const auto pair = build_supersolution(spec, engine, u0, solver_time_grid(T, c.steps), c.A, C0);
  out.result["supersolution"] = pair.to_json();
  out.result["T"] = T;
  if (!pair.verified || !pair.T_star || *pair.T_star < T) {
    out.result["error"] = "supersolution not verified up to T";
    return out;
  }
  IterateOptions io;
  io.tol = c.tol;
  auto tr = monotone_iterate(spec, engine, u0, pair, io);
  out.result["trace"] = tr.header();
  if (tr.status == SolveStatus::converged) {
    const auto d = decay_check(tr, spec, c.A, C0);
    out.result["decay_check"] = {{"C_meas", d.C_meas}, {"bound", d.bound}, {"pass", d.pass}};
    out.code = 0;
  } else {
    out.code = tr.status == SolveStatus::blown_up ? 1 : 2;
  }
  out.trace = std::move(tr);
  return out;
}

int run_solve(const Config& c) {
  const auto t0 = Clock::now();
  const auto spec = make_spec(c, "solve");
  auto res = solve_once(spec, c);
  if (res.trace && !c.out.empty()) {
    std::filesystem::create_directories(c.out);
    std::ofstream csv(std::filesystem::path(c.out) / "trace.csv");
    res.trace->write_csv(csv);
  }
  emit(make_report("solve", spec_json(spec, c), res.result, json::array(), c, t0), c, "solve");
  return res.code;
}

std::vector<double> probe_taus(const Config& c) { return geometric_grid(1e-6, c.T > 0.0 ? c.T : 1e-2, 9); }

ProbeResult probe_once(const ProblemSpec& spec, const Config& c) {
  const auto grid = default_grid(spec, c.grid_M);
  const auto engine = SemigroupEngine::free_space(grid);
  return blowup_probe(spec, engine, build_singular_data(spec, grid), probe_taus(c));
}

int run_probe(const Config& c) {
  const auto t0 = Clock::now();
  const auto spec = make_spec(c, "probe");
  const auto pr = probe_once(spec, c);
  emit(make_report("probe", spec_json(spec, c), pr.to_json(), json::array(), c, t0), c, "probe");
  if (!pr.applicable) return kExitInconclusive;
  return pr.violated ? kExitExcluded : kExitPredicted;
}

std::string csv_num(const std::optional<double>& x) {
  if (!x) return "";
  std::ostringstream os;
  os.precision(10);
  os << *x;
  return os.str();
}

int run_sweep(const Config& c) {
  const auto t0 = Clock::now();
  const auto rhos = parse_list(c.rho_list);
  std::ostringstream csv;
  csv << "rho,verdict,rule,T_star,C_meas,solve_status,escape_time,Phi_max,probe_violated,note\n";
  json rows = json::array();
  for (double rho : rhos) {
    Config rc = c;
    rc.rho = rho;
    std::string verdict = "invalid", rule, status, note, violated;
    std::optional<double> T_star, C_meas, escape, phi;
    try {
      const auto spec = make_spec(rc, "sweep-rho");
      ClassifyOptions opt;
      opt.A = c.A;
      const auto v = classify(spec, opt);
      verdict = to_string(v.existence);
      rule = v.applied_rule;
      if (v.existence == Existence::predicted) {
        Config sc = rc;
        sc.method = "monotone";
        const auto s = solve_once(spec, sc);
        if (s.result.contains("T_admissible") && !s.result["T_admissible"].is_null())
          T_star = s.result["T_admissible"].get<double>();
        if (s.trace) {
          status = to_string(s.trace->status);
          if (s.trace->status == SolveStatus::converged) C_meas = s.trace->C_meas;
        } else if (s.result.contains("error")) {
          note = s.result["error"].get<std::string>();
        }
      } else {
        Config dc = rc;
        dc.method = "direct";
        const auto s = solve_once(spec, dc);
        status = to_string(s.trace->status);
        escape = s.trace->escape_time;
      }
      const auto pr = probe_once(spec, rc);
      if (pr.applicable) {
        phi = pr.Phi_max;
        violated = pr.violated ? "true" : "false";
      } else {
        note += (note.empty() ? "" : "; ") + ("probe inapplicable: " + pr.reason);
      }
    } catch (const std::exception& e) {
      note = e.what();
    }
    for (char& ch : note)
      if (ch == ',' || ch == '\n') ch = ';';
    csv << csv_num(rho) << ',' << verdict << ',' << rule << ',' << csv_num(T_star) << ',' << csv_num(C_meas) << ','
        << status << ',' << csv_num(escape) << ',' << csv_num(phi) << ',' << violated << ',' << note << "\n";
    rows.push_back({{"rho", rho},
                    {"verdict", verdict},
                    {"rule", rule},
                    {"T_star", T_star ? json(*T_star) : json(nullptr)},
                    {"C_meas", C_meas ? json(*C_meas) : json(nullptr)},
                    {"solve_status", status},
                    {"escape_time", escape ? json(*escape) : json(nullptr)},
                    {"Phi_max", phi ? json(*phi) : json(nullptr)},
                    {"note", note}});
  }
  std::cout << csv.str();
  if (!c.out.empty()) {
    std::filesystem::create_directories(c.out);
    std::ofstream(std::filesystem::path(c.out) / "sweep.csv") << csv.str();
    json spec = {{"N", c.N}, {"r", c.r}, {"f", c.f}, {"h", c.h}, {"rho_list", c.rho_list}, {"A", c.A},
                 {"grid_M", c.grid_M}, {"steps", c.steps}};
    std::ofstream(std::filesystem::path(c.out) / "sweep-rho.json")
        << make_report("sweep-rho", spec, rows, json::array(), c, t0).dump(2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Estimate battery

const std::vector<std::string> kChecks = {"smoothing", "singular_decay", "lower_bounds", "ordering"};

int run_verify(const Config& c) {
  const auto t0 = Clock::now();
  std::vector<std::string> selected;
  if (c.only.empty()) {
    selected = kChecks;
  } else {
    std::stringstream ss(c.only);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (std::find(kChecks.begin(), kChecks.end(), item) == kChecks.end())
        throw std::invalid_argument("unknown check '" + item + "'");
      selected.push_back(item);
    }
  }
  EngineOptions eo;
  if (c.inject_fault) eo.kernel_scale = 1.25;
  json records = json::array();
  std::vector<std::string> failed;
  auto record = [&](const std::string& name, const CheckRecord& rec) {
    records.push_back(rec.to_json());
    if (!rec.pass && std::find(failed.begin(), failed.end(), name) == failed.end()) failed.push_back(name);
  };
  auto want = [&](const std::string& name) {
    return std::find(selected.begin(), selected.end(), name) != selected.end();
  };

  if (want("smoothing")) {
    const std::vector<std::pair<double, double>> exps = {
        {1.0, kInf}, {1.0, 2.0}, {2.0, kInf}, {2.0, 4.0}, {1.5, 3.0}, {kInf, kInf}};
    for (int N = 1; N <= 3; ++N) {
      const auto engine = SemigroupEngine::free_space(RadialGrid::make(N, 8.0, c.grid_M, 3.0), eo);
      const auto gauss = RadialFunction::sample(engine.grid(), [](double s) { return std::exp(-s * s); });
      const auto plateau =
          RadialFunction::sample(engine.grid(), [](double s) { return 1.0 / (1.0 + std::pow(s / 2.0, 8)); });
      for (double t : {0.01, 0.1, 1.0})
        for (const auto& [q1, q2] : exps)
          for (const auto* f : {&gauss, &plateau}) record("smoothing", verify_smoothing(engine, *f, t, q1, q2).record);
    }
  }
  if (want("singular_decay")) {
    const auto engine = SemigroupEngine::free_space(RadialGrid::make(3, 8.0, std::max(c.grid_M, 1024), 3.0), eo);
    for (double gamma : {0.5, 1.0, 2.0})
      record("singular_decay", estimate_singular_decay_constant(3, gamma, kInf, kInf, engine).record);
  }
  if (want("lower_bounds")) {
    for (int N = 1; N <= 3; ++N) {
      // Three decades inside t <= l^2; near t = l^2 the truncated data has
      // spread out and the ratio for N = 3 drops by a further factor ~4.
      const auto engine = SemigroupEngine::dirichlet_ball(N, 4.0, 512, eo);
      record("lower_bounds", verify_lower_bounds(engine, 1.0, N == 1 ? 0.5 : 1.0, {1e-4, 1e-3, 1e-2, 1e-1}).record);
    }
  }
  if (want("ordering")) {
    const auto engine = SemigroupEngine::free_space(RadialGrid::make(3, 8.0, c.grid_M, 3.0), eo);
    const auto box = RadialFunction::sample(engine.grid(), [](double s) { return s <= 1.0 ? 1.0 : 0.0; }, 0.0, 1.0);
    record("ordering", verify_kernel_ordering(engine, box, 0.5, 2.0, 4.0).record);
  }
  for (const auto& name : failed) std::cerr << "check failed: " << name << "\n";
  json result = {{"checks", selected}, {"failed", failed}, {"fault_injected", c.inject_fault},
                 {"pass", failed.empty()}};
  emit(make_report("verify", json::object(), result, records, c, t0), c, "verify");
  return failed.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Config file: key=value per line, '#' comments. Entries are spliced in right
// after the subcommand so flags given on the command line win.

std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") throw std::invalid_argument("config files cannot include other config files");
    if (key == "explain" || key == "timings" || key == "inject-fault") {
      if (value == "true" || value == "1") out.push_back("--" + key);
      continue;
    }
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const auto extra = config_tokens(path);
  std::size_t at = 0;
  while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;
  if (at < args.size()) ++at;  // past the subcommand name
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
  return args;
}

void add_common(CLI::App* sub, Config& c, std::string& config_path) {
  sub->set_help_flag("--help", "print this help and exit");  // -h is the weight option
  sub->add_option("--N", c.N, "space dimension (1, 2, 3)");
  sub->add_option("--r", c.r, "Lebesgue exponent r >= 1");
  sub->add_option("--rho", c.rho, "singularity exponent, 0 < rho < N");
  sub->add_option("--K", c.K, "class constant K");
  sub->add_option("--a", c.a, "class radius a");
  sub->add_option("--f", c.f, "nonlinearity: power:q=..|exp:alpha=..|logpow:q=..,s=..|tab:points=t/f;..");
  sub->add_option("--h", c.h, "time weight: one|weight:beta=..|weight:points=t/h;..");
  sub->add_option("--side", c.side, "data class: upper|lower|both");
  sub->add_option("--A", c.A, "supersolution amplification A > 1");
  sub->add_option("--tol", c.tol, "Picard tolerance");
  sub->add_option("--grid-M", c.grid_M, "radial grid nodes");
  sub->add_option("--T", c.T, "final time (0: command default)");
  sub->add_option("--steps", c.steps, "time steps");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--config", config_path, "key=value config file");
  sub->add_flag("--print-config", c.print_config, "print the effective configuration and exit");
  sub->add_flag("--explain", c.explain, "print the certificate chain to stderr");
  sub->add_flag("--timings", c.timings, "record wall-clock timings (breaks byte-for-byte reproducibility)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heatlab: semilinear heat equations with singular initial data"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  Config c;
  std::string config_path;
  auto* classify_cmd = app.add_subcommand("classify", "existence / uniqueness verdict");
  auto* sweep_cmd = app.add_subcommand("sweep-rho", "classify, solve and probe over a list of rho");
  auto* solve_cmd = app.add_subcommand("solve", "mild solution by monotone iteration or direct sweep");
  auto* probe_cmd = app.add_subcommand("probe", "blow-up probe Phi(tau)");
  auto* verify_cmd = app.add_subcommand("verify", "semigroup estimate battery");
  auto* criteria_cmd = app.add_subcommand("criteria", "critical values and integral criteria");
  for (auto* sub : {classify_cmd, sweep_cmd, solve_cmd, probe_cmd, verify_cmd, criteria_cmd})
    add_common(sub, c, config_path);
  sweep_cmd->add_option("--rho-list", c.rho_list, "comma-separated rho values (empty: header only)")->expected(0, 1);
  solve_cmd->add_option("--method", c.method, "monotone|direct");
  verify_cmd->add_option("--only", c.only, "comma-separated subset of smoothing,singular_decay,lower_bounds,ordering");
  verify_cmd->add_flag("--inject-fault", c.inject_fault, "scale the heat kernel by 1.25 (suite self-test)");

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  if (c.print_config) {
    print_config(c, std::cout);
    return 0;
  }
  try {
    if (*classify_cmd) return run_classify(c);
    if (*sweep_cmd) return run_sweep(c);
    if (*solve_cmd) return run_solve(c);
    if (*probe_cmd) return run_probe(c);
    if (*verify_cmd) return run_verify(c);
    if (*criteria_cmd) return run_criteria(c);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

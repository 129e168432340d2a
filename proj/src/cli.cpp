#include "lfrg/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lfrg/errors.hpp"
#include "lfrg/ode.hpp"
#include "lfrg/potential.hpp"
#include "lfrg/tadpole.hpp"

namespace lfrg::cli {

using nlohmann::json;

namespace {

const std::map<std::string, Command> kCommands = {
    {"tadpole", Command::Tadpole},       {"beta", Command::Beta},
    {"flow", Command::Flow},             {"fixed-point", Command::FixedPoint},
    {"exponents", Command::Exponents},   {"scan", Command::Scan},
    {"potential-flow", Command::PotentialFlow},
};

const std::vector<std::string> kBackgrounds = {"minkowski-vacuum", "thermal", "thermal-high-t",
                                               "de-sitter"};
const std::vector<std::string> kMuModes = {"fixed", "tied-to-k", "tied-to-h"};
const std::vector<std::string> kSignModes = {"paper-transcribed", "kernel-consistent"};
const std::vector<std::string> kBetaModes = {"transcribed", "kernel"};

struct HelpRequested {
  std::string text;
};

std::string num(double x) { return fmt::format("{:.17g}", x); }

double parse_number(std::string_view s, const std::string& what) {
  double v = 0.0;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw UsageError(fmt::format("{}: '{}' is not a finite number", what, s));
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  return parts;
}

double& coupling_slot(CouplingVector& g, const std::string& key, const std::string& flag) {
  if (key == "U0") return g.U0;
  if (key == "m2") return g.m2;
  if (key == "lambda") return g.lambda;
  throw UsageError(fmt::format("{}: unknown coupling '{}' (expected U0, m2, lambda)", flag, key));
}

/// "U0=..,m2=..,lambda=.." where any subset of keys may appear.
void apply_couplings(const std::string& spec, CouplingVector& g, const std::string& flag) {
  for (const auto& item : split(spec, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw UsageError(fmt::format("{}: expected key=value, got '{}'", flag, item));
    const std::string key = item.substr(0, eq);
    coupling_slot(g, key, flag) = parse_number(item.substr(eq + 1), flag + " " + key);
  }
}

GridAxis parse_axis(const std::string& spec, const std::string& what) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) throw UsageError(fmt::format("{}: expected lo:hi:count", what));
  const double count = parse_number(parts[2], what);
  if (count < 1 || count != std::floor(count) || count > 1e6)
    throw UsageError(fmt::format("{}: count must be a positive integer", what));
  return {parse_number(parts[0], what), parse_number(parts[1], what), static_cast<int>(count)};
}

GridAxis& grid_slot(GridSpec& grid, const std::string& key, const std::string& flag) {
  if (key == "U0") return grid.U0;
  if (key == "m2") return grid.m2;
  if (key == "lambda") return grid.lambda;
  throw UsageError(fmt::format("{}: unknown grid axis '{}'", flag, key));
}

void apply_grid(const std::string& spec, GridSpec& grid, const std::string& flag) {
  for (const auto& item : split(spec, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw UsageError(fmt::format("{}: expected axis=lo:hi:count, got '{}'", flag, item));
    const std::string key = item.substr(0, eq);
    grid_slot(grid, key, flag) = parse_axis(item.substr(eq + 1), flag + " " + key);
  }
}

std::vector<double> parse_list(const std::string& spec, const std::string& flag) {
  std::vector<double> out;
  if (spec.empty()) return out;
  for (const auto& item : split(spec, ',')) out.push_back(parse_number(item, flag));
  return out;
}

Format parse_format(const std::string& s, const std::string& what) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw UsageError(fmt::format("{}: unknown format '{}'", what, s));
}

DeSitterSign parse_sign(const std::string& s, const std::string& what) {
  if (s == "paper-transcribed") return DeSitterSign::PaperTranscribed;
  if (s == "kernel-consistent") return DeSitterSign::KernelConsistent;
  throw UsageError(fmt::format("{}: unknown sign mode '{}'", what, s));
}

// ---------------------------------------------------------------------------
// Strict JSON reading
// ---------------------------------------------------------------------------

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw UsageError(fmt::format("config: '{}' must be an object", where));
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw UsageError(fmt::format("config: unknown key '{}.{}'", where, key));
  }
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw UsageError(fmt::format("config: '{}.{}' must be a number", where, key));
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw UsageError(fmt::format("config: '{}.{}' must be finite", where, key));
  return x;
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw UsageError(fmt::format("config: '{}.{}' must be a string", where, key));
  return v.get<std::string>();
}

template <class T>
void read_number(const json& obj, const char* key, const std::string& where, T& dst) {
  if (!obj.contains(key)) return;
  const double x = get_number(obj, key, where);
  if constexpr (std::is_integral_v<T>) {
    if (x != std::floor(x) || x < 0)
      throw UsageError(fmt::format("config: '{}.{}' must be a non-negative integer", where, key));
  }
  dst = static_cast<T>(x);
}

void read_optional(const json& obj, const char* key, const std::string& where,
                   std::optional<double>& dst) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    dst.reset();
    return;
  }
  dst = get_number(obj, key, where);
}

void apply_background_json(const json& b, BackgroundConfig& bg) {
  check_keys(b, "background", {"kind", "d", "beta", "H2", "xi", "mu_mode", "mu2", "sign_mode"});
  if (b.contains("kind")) bg.kind = get_string(b, "kind", "background");
  read_number(b, "d", "background", bg.d);
  read_number(b, "beta", "background", bg.beta);
  read_number(b, "H2", "background", bg.H2);
  read_number(b, "xi", "background", bg.xi);
  if (b.contains("mu_mode")) bg.mu_mode = get_string(b, "mu_mode", "background");
  read_number(b, "mu2", "background", bg.mu2);
  if (b.contains("sign_mode"))
    bg.sign = parse_sign(get_string(b, "sign_mode", "background"), "config: background.sign_mode");
}

void apply_grid_json(const json& g, GridSpec& grid) {
  if (g.is_string()) {
    apply_grid(g.get<std::string>(), grid, "config: solver.grid");
    return;
  }
  check_keys(g, "solver.grid", {"U0", "m2", "lambda"});
  for (const auto& [key, v] : g.items()) {
    const std::string where = "solver.grid." + key;
    if (!v.is_array() || v.size() != 3)
      throw UsageError(fmt::format("config: '{}' must be [lo, hi, count]", where));
    json wrap = {{"lo", v[0]}, {"hi", v[1]}, {"count", v[2]}};
    GridAxis axis;
    read_number(wrap, "lo", where, axis.lo);
    read_number(wrap, "hi", where, axis.hi);
    read_number(wrap, "count", where, axis.count);
    if (axis.count < 1) throw UsageError(fmt::format("config: '{}' count must be >= 1", where));
    grid_slot(grid, key, "config") = axis;
  }
}

void apply_solver_json(const json& s, SolverConfig& sv) {
  check_keys(s, "solver",
             {"rel_tol", "abs_tol", "t0", "t1", "max_steps", "Lambda", "beta_mode", "fd_step",
              "newton_tol", "k2_over_H2", "M2", "k", "grid", "N", "rho_max", "checkpoints"});
  read_number(s, "rel_tol", "solver", sv.rel_tol);
  read_number(s, "abs_tol", "solver", sv.abs_tol);
  read_number(s, "t0", "solver", sv.t0);
  read_number(s, "t1", "solver", sv.t1);
  read_number(s, "max_steps", "solver", sv.max_steps);
  read_number(s, "Lambda", "solver", sv.Lambda);
  if (s.contains("beta_mode")) sv.beta_mode = get_string(s, "beta_mode", "solver");
  read_number(s, "fd_step", "solver", sv.fd_step);
  read_number(s, "newton_tol", "solver", sv.newton_tol);
  read_optional(s, "k2_over_H2", "solver", sv.k2_over_H2);
  read_number(s, "M2", "solver", sv.M2);
  read_optional(s, "k", "solver", sv.k);
  if (s.contains("grid")) apply_grid_json(s.at("grid"), sv.grid);
  read_number(s, "N", "solver", sv.N);
  read_optional(s, "rho_max", "solver", sv.rho_max);
  if (s.contains("checkpoints")) {
    const auto& c = s.at("checkpoints");
    if (!c.is_array()) throw UsageError("config: 'solver.checkpoints' must be an array");
    sv.checkpoints.clear();
    for (std::size_t i = 0; i < c.size(); ++i) {
      json wrap = {{"v", c[i]}};
      double v = 0.0;
      read_number(wrap, "v", "solver.checkpoints", v);
      sv.checkpoints.push_back(v);
    }
  }
}

void apply_output_json(const json& o, OutputConfig& out) {
  check_keys(o, "output", {"path", "format", "quiet"});
  if (o.contains("path")) out.path = get_string(o, "path", "output");
  if (o.contains("format")) out.format = parse_format(get_string(o, "format", "output"), "config: output.format");
  if (o.contains("quiet")) {
    if (!o.at("quiet").is_boolean()) throw UsageError("config: 'output.quiet' must be a boolean");
    out.quiet = o.at("quiet").get<bool>();
  }
}

// ---------------------------------------------------------------------------
// Config -> library objects
// ---------------------------------------------------------------------------

MuMode make_mu(const BackgroundConfig& b) {
  const std::string mode =
      b.mu_mode.value_or(b.kind == "de-sitter" ? std::string("tied-to-h") : std::string("tied-to-k"));
  if (mode == "fixed") return mu::Fixed{b.mu2};
  if (mode == "tied-to-k") return mu::TiedToK{};
  if (mode == "tied-to-h") return mu::TiedToH{};
  throw UsageError(fmt::format("--mu-mode: unknown mode '{}'", mode));
}

Background make_background(const BackgroundConfig& b) {
  const MuMode mu = make_mu(b);
  if (b.kind == "minkowski-vacuum") return MinkowskiVacuum{b.d, mu};
  if (b.kind == "thermal") return Thermal{b.beta, mu};
  if (b.kind == "de-sitter") return DeSitter{b.H2, b.xi, mu};
  if (b.kind == "thermal-high-t")
    throw UsageError("--background thermal-high-t only defines a beta system; use 'thermal'");
  throw UsageError(fmt::format("--background: unknown kind '{}'", b.kind));
}

BetaSystem make_system(const RunConfig& cfg) {
  const auto& b = cfg.background;
  const auto& s = cfg.solver;
  const bool kernel = s.beta_mode == "kernel";
  if (!kernel && s.beta_mode != "transcribed")
    throw UsageError(fmt::format("--beta-mode: unknown mode '{}'", s.beta_mode));
  if (b.kind == "thermal-high-t") {
    if (kernel) throw UsageError("--beta-mode kernel is not available for thermal-high-t");
    return BetaSystem(system::ThermalHighT{}, s.Lambda);
  }
  const Background bg = make_background(b);
  if (b.kind == "minkowski-vacuum" && b.d != 4)
    throw UsageError("--d: beta systems are four-dimensional");
  validate(bg);
  if (kernel) return BetaSystem(system::Kernel{bg, s.fd_step}, s.Lambda);
  if (b.kind == "minkowski-vacuum") return BetaSystem(system::MinkowskiDimensionless{make_mu(b)}, s.Lambda);
  if (b.kind == "thermal") return BetaSystem(system::ThermalExact{std::get<Thermal>(bg)}, s.Lambda);
  return BetaSystem(system::DeSitterDimensionless{std::get<DeSitter>(bg), b.sign, s.k2_over_H2, false},
                    s.Lambda);
}

IntegratorOptions make_integrator(const SolverConfig& s) {
  IntegratorOptions o;
  o.rel_tol = s.rel_tol;
  o.abs_tol = s.abs_tol;
  o.max_steps = s.max_steps;
  o.checkpoints = s.checkpoints;
  return o;
}

NewtonOptions make_newton(const SolverConfig& s) {
  NewtonOptions o;
  o.tol = s.newton_tol;
  return o;
}

void validate_config(const RunConfig& cfg) {
  const auto& b = cfg.background;
  const auto& s = cfg.solver;
  if (b.kind.empty()) throw UsageError("--background is required");
  if (std::find(kBackgrounds.begin(), kBackgrounds.end(), b.kind) == kBackgrounds.end())
    throw UsageError(fmt::format("--background: unknown kind '{}'", b.kind));
  if (b.mu_mode && std::find(kMuModes.begin(), kMuModes.end(), *b.mu_mode) == kMuModes.end())
    throw UsageError(fmt::format("--mu-mode: unknown mode '{}'", *b.mu_mode));
  if (std::find(kBetaModes.begin(), kBetaModes.end(), s.beta_mode) == kBetaModes.end())
    throw UsageError(fmt::format("--beta-mode: unknown mode '{}'", s.beta_mode));
  if (!(s.rel_tol > 0) || !(s.abs_tol >= 0)) throw UsageError("--rel-tol must be > 0 and --abs-tol >= 0");
  if (!(s.Lambda > 0)) throw UsageError("--Lambda must be > 0");
  if (s.max_steps < 1) throw UsageError("--max-steps must be >= 1");
  if (!(s.newton_tol > 0)) throw UsageError("--newton-tol must be > 0");
  if (s.k && !(*s.k > 0)) throw UsageError("--k must be > 0");
  for (double v : {b.beta, b.H2, b.xi, b.mu2, s.t0, s.t1, s.fd_step, s.M2})
    if (!std::isfinite(v)) throw UsageError("numeric fields must be finite");
}

// ---------------------------------------------------------------------------
// Result serialization
// ---------------------------------------------------------------------------

json couplings_json(const CouplingVector& g) {
  return {{"U0", g.U0}, {"m2", g.m2}, {"lambda", g.lambda}, {"scaling", to_string(g.scaling)}};
}

json complex_list(const std::vector<std::complex<double>>& v) {
  json a = json::array();
  for (const auto& z : v) a.push_back({{"re", z.real()}, {"im", z.imag()}});
  return a;
}

json report_json(const FixedPointReport& r) {
  json m = json::array();
  for (Eigen::Index i = 0; i < r.stability_matrix.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.stability_matrix.cols(); ++j) row.push_back(r.stability_matrix(i, j));
    m.push_back(row);
  }
  return {{"location", couplings_json(r.location)},
          {"residual", r.residual},
          {"iterations", r.iterations},
          {"active", r.active},
          {"stability_matrix", m},
          {"eigenvalues", complex_list(r.eigenvalues)},
          {"exponents", complex_list(r.exponents)},
          {"classification",
           {{"kind", to_string(r.classification.kind)},
            {"relevant", r.classification.relevant},
            {"irrelevant", r.classification.irrelevant},
            {"marginal", r.classification.marginal}}}};
}

json stats_json(const IntegratorStats& s) {
  return {{"accepted", s.accepted},
          {"rejected", s.rejected},
          {"domain_rejections", s.domain_rejections},
          {"rhs_evaluations", s.rhs_evaluations}};
}

json termination_json(const Termination& t) {
  return {{"kind", kind_name(t)}, {"detail", describe(t)}};
}

/// What a command produced, in both renderings.
struct Outcome {
  int code = kOk;
  json doc = json::object();
  std::string csv;
  std::size_t rows = 0;
  json termination = {{"kind", "completed"}};
};

std::string csv_row(std::initializer_list<double> xs) {
  std::string line;
  bool first = true;
  for (double x : xs) {
    if (!first) line += ',';
    line += num(x);
    first = false;
  }
  line += '\n';
  return line;
}

void numerical_failure(Outcome& o, const std::string& kind, const std::string& detail) {
  o.code = kNumerical;
  o.termination = {{"kind", kind}, {"detail", detail}};
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

Outcome run_tadpole(const RunConfig& cfg) {
  Outcome o;
  const Background bg = make_background(cfg.background);
  validate(bg);
  const double k = cfg.solver.k.value_or(cfg.solver.Lambda * std::exp(cfg.solver.t0));
  o.csv = "M2,k,value\n";
  try {
    const auto v = wick_square(cfg.solver.M2, bg, k);
    o.doc = {{"M2", v.M2}, {"k", k}, {"value", v.value}};
    o.csv += csv_row({v.M2, k, v.value});
    o.rows = 1;
  } catch (const DomainError& e) {
    numerical_failure(o, "domain-error", e.what());
  }
  return o;
}

Outcome run_beta(const RunConfig& cfg) {
  Outcome o;
  const BetaSystem sys = make_system(cfg);
  const double t = cfg.solver.t0;
  o.csv = "t,k,beta_U0,beta_m2,beta_lambda\n";
  try {
    CouplingVector g = cfg.couplings;
    g.scaling = sys.scaling();
    const auto r = sys.rate(t, g);
    o.doc = {{"system", sys.name()}, {"t", t}, {"k", sys.k(t)}, {"couplings", couplings_json(g)},
             {"beta", couplings_json(r)}};
    o.csv += csv_row({t, sys.k(t), r.U0, r.m2, r.lambda});
    o.rows = 1;
  } catch (const DomainError& e) {
    numerical_failure(o, "domain-error", e.what());
  }
  return o;
}

Outcome run_flow(const RunConfig& cfg) {
  Outcome o;
  FlowProblem p{make_system(cfg), cfg.couplings, cfg.solver.t0, cfg.solver.t1,
                make_integrator(cfg.solver)};
  p.initial.scaling = p.system.scaling();
  const auto traj = integrate(p);
  json rows = json::array();
  o.csv = "t,k,U0,m2,lambda\n";
  for (const auto& s : traj.samples) {
    o.csv += csv_row({s.t, s.k, s.couplings.U0, s.couplings.m2, s.couplings.lambda});
    rows.push_back({s.t, s.k, s.couplings.U0, s.couplings.m2, s.couplings.lambda});
  }
  o.rows = traj.samples.size();
  o.termination = termination_json(traj.termination);
  o.doc = {{"system", p.system.name()},
           {"scaling", to_string(p.system.scaling())},
           {"columns", {"t", "k", "U0", "m2", "lambda"}},
           {"rows", rows},
           {"stats", stats_json(traj.stats)}};
  if (!reached_end(traj.termination)) o.code = kNumerical;
  return o;
}

Outcome run_fixed_point(const RunConfig& cfg) {
  Outcome o;
  const BetaSystem sys = make_system(cfg);
  o.csv = "U0,m2,lambda,residual\n";
  try {
    const auto r = find_fixed_point(sys, cfg.couplings, make_newton(cfg.solver), cfg.solver.t0);
    o.doc = {{"system", sys.name()}, {"fixed_point", report_json(r)}};
    o.csv += csv_row({r.location.U0, r.location.m2, r.location.lambda, r.residual});
    o.rows = 1;
  } catch (const NonConvergence& e) {
    numerical_failure(o, "non-convergence", e.what());
    o.doc = {{"system", sys.name()}, {"last_iterate", e.last_iterate}, {"residual", e.residual}};
  } catch (const ConvergenceError& e) {
    numerical_failure(o, "non-convergence", e.what());
  } catch (const DomainError& e) {
    numerical_failure(o, "domain-error", e.what());
  }
  return o;
}

double active_residual(const BetaSystem& sys, const CouplingVector& g, double t) {
  const auto r = sys.rate(t, g);
  const auto act = sys.active();
  double res = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    if (act[i]) res = std::max(res, std::abs(r[i]));
  return res;
}

Outcome run_exponents(const RunConfig& cfg) {
  Outcome o;
  const BetaSystem sys = make_system(cfg);
  const double t = cfg.solver.t0;
  o.csv = "index,eigenvalue_re,eigenvalue_im,exponent_re,exponent_im\n";
  try {
    CouplingVector at = cfg.couplings;
    at.scaling = sys.scaling();
    const double input_residual = active_residual(sys, at, t);
    // Points typed in by hand are usually only accurate to a few digits.
    const bool polish = input_residual > 1e-8;
    const auto r = polish ? find_fixed_point(sys, at, make_newton(cfg.solver), t)
                          : stability_analysis(sys, at, make_newton(cfg.solver), 1.0, t);
    o.doc = {{"system", sys.name()},
             {"input", couplings_json(at)},
             {"input_residual", input_residual},
             {"polished", polish},
             {"fixed_point", report_json(r)}};
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
      o.csv += csv_row({static_cast<double>(i), r.eigenvalues[i].real(), r.eigenvalues[i].imag(),
                        r.exponents[i].real(), r.exponents[i].imag()});
    o.rows = r.eigenvalues.size();
  } catch (const NonConvergence& e) {
    numerical_failure(o, "non-convergence", e.what());
    o.doc = {{"system", sys.name()}, {"last_iterate", e.last_iterate}, {"residual", e.residual}};
  } catch (const ConvergenceError& e) {
    numerical_failure(o, "non-convergence", e.what());
  } catch (const DomainError& e) {
    numerical_failure(o, "domain-error", e.what());
  }
  return o;
}

Outcome run_scan(const RunConfig& cfg) {
  Outcome o;
  const BetaSystem sys = make_system(cfg);
  const auto res = scan_fixed_points(sys, cfg.solver.grid, make_newton(cfg.solver),
                                     Execution::Parallel, cfg.solver.t0);
  json roots = json::array();
  o.csv = "U0,m2,lambda,residual\n";
  for (const auto& r : res.roots) {
    roots.push_back(report_json(r));
    o.csv += csv_row({r.location.U0, r.location.m2, r.location.lambda, r.residual});
  }
  o.rows = res.roots.size();
  o.doc = {{"system", sys.name()},
           {"starts", res.starts},
           {"outside_domain", res.outside_domain},
           {"failed", res.failed},
           {"roots", roots}};
  return o;
}

Outcome run_potential_flow(const RunConfig& cfg) {
  Outcome o;
  const auto& s = cfg.solver;
  const Background bg = make_background(cfg.background);
  validate(bg);
  if (s.N < kMinGridPoints) throw UsageError(fmt::format("--N must be >= {}", kMinGridPoints));
  const double k0 = s.Lambda * std::exp(s.t0);
  const double rho_max = s.rho_max.value_or(default_rho_max(cfg.couplings.m2, cfg.couplings.lambda, s.Lambda));
  if (!(rho_max > 0)) throw UsageError("--rho-max must be > 0");
  CouplingVector g = cfg.couplings;
  g.scaling = Scaling::Dimensionful;
  const auto initial = quartic_grid(rho_max, s.N, k0, g);
  PotentialFlowOptions opts;
  opts.integrator = make_integrator(s);
  opts.Lambda = s.Lambda;
  const auto flow = flow_potential(initial, bg, s.t1, opts);

  json snaps = json::array();
  o.csv = "t,rho,U\n";
  for (std::size_t i = 0; i < flow.snapshots.size(); ++i) {
    const auto& grid = flow.snapshots[i];
    const auto ext = extract_couplings(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) o.csv += csv_row({flow.times[i], grid.rho(j), grid.values[j]});
    o.rows += grid.size();
    snaps.push_back({{"t", flow.times[i]},
                     {"k", grid.k},
                     {"rho_max", grid.rho_max},
                     {"couplings_at_origin", couplings_json(ext)},
                     {"U", grid.values}});
  }
  o.termination = termination_json(flow.termination);
  o.doc = {{"N", s.N}, {"rho_max", rho_max}, {"snapshots", snaps}, {"stats", stats_json(flow.stats)}};
  if (!reached_end(flow.termination)) o.code = kNumerical;
  return o;
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(fmt::format("cannot open '{}' for writing", path));
  f << data;
  f.close();
  if (!f) throw IoError(fmt::format("failed writing '{}'", path));
}

json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot read config '{}'", path));
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw UsageError(fmt::format("config '{}': {}", path, e.what()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(Command c) {
  for (const auto& [name, cmd] : kCommands)
    if (cmd == c) return name;
  return "?";
}

std::string to_string(Format f) { return f == Format::Csv ? "csv" : "json"; }

Format RunConfig::effective_format() const {
  if (output.format) return *output.format;
  switch (command) {
    case Command::FixedPoint:
    case Command::Exponents:
    case Command::Scan: return Format::Json;
    default: return Format::Csv;
  }
}

json to_json(const RunConfig& cfg) {
  const auto& b = cfg.background;
  const auto& s = cfg.solver;
  json bg = {{"kind", b.kind}, {"d", b.d},   {"beta", b.beta}, {"H2", b.H2},
             {"xi", b.xi},     {"mu2", b.mu2}, {"sign_mode", to_string(b.sign)}};
  if (b.mu_mode) bg["mu_mode"] = *b.mu_mode;
  json grid = json::object();
  grid["U0"] = {s.grid.U0.lo, s.grid.U0.hi, s.grid.U0.count};
  grid["m2"] = {s.grid.m2.lo, s.grid.m2.hi, s.grid.m2.count};
  grid["lambda"] = {s.grid.lambda.lo, s.grid.lambda.hi, s.grid.lambda.count};
  json solver = {{"rel_tol", s.rel_tol},       {"abs_tol", s.abs_tol},   {"t0", s.t0},
                 {"t1", s.t1},                 {"max_steps", s.max_steps}, {"Lambda", s.Lambda},
                 {"beta_mode", s.beta_mode},   {"fd_step", s.fd_step},   {"newton_tol", s.newton_tol},
                 {"M2", s.M2},                 {"grid", grid},           {"N", s.N},
                 {"checkpoints", s.checkpoints}};
  solver["k2_over_H2"] = s.k2_over_H2 ? json(*s.k2_over_H2) : json(nullptr);
  solver["k"] = s.k ? json(*s.k) : json(nullptr);
  solver["rho_max"] = s.rho_max ? json(*s.rho_max) : json(nullptr);
  json output = {{"format", to_string(cfg.effective_format())}};
  if (cfg.output.path) output["path"] = *cfg.output.path;
  return {{"command", to_string(cfg.command)},
          {"background", bg},
          {"couplings", {{"U0", cfg.couplings.U0}, {"m2", cfg.couplings.m2}, {"lambda", cfg.couplings.lambda}}},
          {"solver", solver},
          {"output", output}};
}

void apply_json(const json& doc, RunConfig& cfg) {
  if (!doc.is_object()) throw UsageError("config: top level must be an object");
  if (doc.contains("config") && doc.at("config").is_object()) {
    apply_json(doc.at("config"), cfg);  // a result document: replay its config
    return;
  }
  check_keys(doc, "", {"command", "background", "couplings", "solver", "output"});
  if (doc.contains("command")) {
    const auto name = get_string(doc, "command", "");
    const auto it = kCommands.find(name);
    if (it == kCommands.end()) throw UsageError(fmt::format("config: unknown command '{}'", name));
    if (it->second != cfg.command)
      throw UsageError(fmt::format("config: was written by '{}', not '{}'", name, to_string(cfg.command)));
  }
  if (doc.contains("background")) apply_background_json(doc.at("background"), cfg.background);
  if (doc.contains("couplings")) {
    const auto& c = doc.at("couplings");
    check_keys(c, "couplings", {"U0", "m2", "lambda"});
    read_number(c, "U0", "couplings", cfg.couplings.U0);
    read_number(c, "m2", "couplings", cfg.couplings.m2);
    read_number(c, "lambda", "couplings", cfg.couplings.lambda);
  }
  if (doc.contains("solver")) apply_solver_json(doc.at("solver"), cfg.solver);
  if (doc.contains("output")) apply_output_json(doc.at("output"), cfg.output);
}

RunConfig parse_config(int argc, const char* const* argv) {
  CLI::App app{"Local-potential renormalization-group flows on flat, thermal and de Sitter backgrounds"};
  app.name("lfrg");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path, format;
  app.add_option("--config", config_path, "JSON config or a previous JSON result to replay");
  app.add_option("--out", out_path, "Output file (stdout when omitted)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--quiet", "Suppress the summary on stderr");

  struct Raw {
    std::string background, mu_mode, sign_mode, beta_mode, couplings, grid, checkpoints;
    int d = 4;
    double beta = 0, H2 = 0, xi = 0, mu2 = 0, t0 = 0, t1 = 0, Lambda = 0, rel_tol = 0, abs_tol = 0;
    double M2 = 0, k = 0, k2_over_H2 = 0, fd_step = 0, newton_tol = 0, rho_max = 0;
    long max_steps = 0;
    std::size_t N = 0;
  } raw;

  auto add_background = [&](CLI::App* s) {
    s->add_option("--background", raw.background, "minkowski-vacuum | thermal | thermal-high-t | de-sitter")
        ->check(CLI::IsMember(kBackgrounds));
    s->add_option("--d", raw.d, "Spacetime dimension (Minkowski tadpole: 2, 4, 6)");
    s->add_option("--beta", raw.beta, "Inverse temperature");
    s->add_option("--H2", raw.H2, "Hubble rate squared");
    s->add_option("--xi", raw.xi, "Curvature coupling");
    s->add_option("--mu-mode", raw.mu_mode, "fixed | tied-to-k | tied-to-h")->check(CLI::IsMember(kMuModes));
    s->add_option("--mu2", raw.mu2, "Renormalization scale squared for --mu-mode fixed");
    s->add_option("--sign-mode", raw.sign_mode, "de Sitter: paper-transcribed | kernel-consistent")
        ->check(CLI::IsMember(kSignModes));
    s->add_option("--Lambda", raw.Lambda, "Reference scale, k = Lambda exp(t)");
    s->add_option("--t0", raw.t0, "Start (or evaluation) RG time");
  };
  auto add_system = [&](CLI::App* s) {
    s->add_option("--beta-mode", raw.beta_mode, "transcribed | kernel")->check(CLI::IsMember(kBetaModes));
    s->add_option("--fd-step", raw.fd_step, "Relative M^2 step for --beta-mode kernel");
    s->add_option("--k2-over-H2", raw.k2_over_H2, "de Sitter: freeze k^2/H^2 at this value");
  };
  auto add_integrator = [&](CLI::App* s) {
    s->add_option("--t1", raw.t1, "End RG time");
    s->add_option("--rel-tol", raw.rel_tol, "Integrator relative tolerance");
    s->add_option("--abs-tol", raw.abs_tol, "Integrator absolute tolerance");
    s->add_option("--max-steps", raw.max_steps, "Integrator step budget");
    s->add_option("--checkpoints", raw.checkpoints, "Comma-separated t values to land on");
  };
  auto add_newton = [&](CLI::App* s) {
    s->add_option("--newton-tol", raw.newton_tol, "Residual tolerance of the root finder");
  };

  auto* tadpole = app.add_subcommand("tadpole", "Evaluate the Wick square at one mass");
  add_background(tadpole);
  tadpole->add_option("--M2", raw.M2, "Fluctuation mass squared");
  tadpole->add_option("--k", raw.k, "Scale k (default Lambda exp(t0))");

  auto* beta = app.add_subcommand("beta", "Evaluate the beta functions at one point");
  add_background(beta);
  add_system(beta);
  beta->add_option("--couplings", raw.couplings, "U0=..,m2=..,lambda=..");

  auto* flow = app.add_subcommand("flow", "Integrate a coupling trajectory");
  add_background(flow);
  add_system(flow);
  add_integrator(flow);
  flow->add_option("--couplings", raw.couplings, "Initial couplings U0=..,m2=..,lambda=..");

  auto* fixed = app.add_subcommand("fixed-point", "Newton search for a fixed point");
  add_background(fixed);
  add_system(fixed);
  add_newton(fixed);
  fixed->add_option("--guess", raw.couplings, "Starting point U0=..,m2=..,lambda=..");

  auto* expo = app.add_subcommand("exponents", "Critical exponents at a fixed point");
  add_background(expo);
  add_system(expo);
  add_newton(expo);
  expo->add_option("--at", raw.couplings, "Fixed point U0=..,m2=..,lambda=..");

  auto* scan = app.add_subcommand("scan", "Newton from every node of a grid");
  add_background(scan);
  add_system(scan);
  add_newton(scan);
  scan->add_option("--grid", raw.grid, "Axes such as m2=-0.5:2:20,lambda=0:50:20");

  auto* pflow = app.add_subcommand("potential-flow", "Evolve the full potential on a rho grid");
  add_background(pflow);
  add_integrator(pflow);
  pflow->add_option("--couplings", raw.couplings, "Initial quartic potential U0=..,m2=..,lambda=..");
  pflow->add_option("--N", raw.N, "Grid points");
  pflow->add_option("--rho-max", raw.rho_max, "Grid extent in rho");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  CLI::App* sub = app.get_subcommands().front();
  RunConfig cfg;
  cfg.command = kCommands.at(sub->get_name());

  if (!config_path.empty()) apply_json(read_json_file(config_path), cfg);

  auto given = [&](const char* name) {
    const auto* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  auto& b = cfg.background;
  auto& s = cfg.solver;
  if (given("--background")) b.kind = raw.background;
  if (given("--d")) b.d = raw.d;
  if (given("--beta")) b.beta = raw.beta;
  if (given("--H2")) b.H2 = raw.H2;
  if (given("--xi")) b.xi = raw.xi;
  if (given("--mu-mode")) b.mu_mode = raw.mu_mode;
  if (given("--mu2")) b.mu2 = raw.mu2;
  if (given("--sign-mode")) b.sign = parse_sign(raw.sign_mode, "--sign-mode");
  if (given("--Lambda")) s.Lambda = raw.Lambda;
  if (given("--t0")) s.t0 = raw.t0;
  if (given("--t1")) s.t1 = raw.t1;
  if (given("--rel-tol")) s.rel_tol = raw.rel_tol;
  if (given("--abs-tol")) s.abs_tol = raw.abs_tol;
  if (given("--max-steps")) s.max_steps = raw.max_steps;
  if (given("--beta-mode")) s.beta_mode = raw.beta_mode;
  if (given("--fd-step")) s.fd_step = raw.fd_step;
  if (given("--newton-tol")) s.newton_tol = raw.newton_tol;
  if (given("--k2-over-H2")) s.k2_over_H2 = raw.k2_over_H2;
  if (given("--M2")) s.M2 = raw.M2;
  if (given("--k")) s.k = raw.k;
  if (given("--N")) s.N = raw.N;
  if (given("--rho-max")) s.rho_max = raw.rho_max;
  if (given("--checkpoints")) s.checkpoints = parse_list(raw.checkpoints, "--checkpoints");
  if (given("--grid")) apply_grid(raw.grid, s.grid, "--grid");
  for (const char* flag : {"--couplings", "--guess", "--at"})
    if (given(flag)) apply_couplings(raw.couplings, cfg.couplings, flag);

  if (app.count("--out") > 0) cfg.output.path = out_path;
  if (app.count("--format") > 0) cfg.output.format = parse_format(format, "--format");
  if (app.count("--quiet") > 0) cfg.output.quiet = true;

  validate_config(cfg);
  return cfg;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Outcome o;
  switch (cfg.command) {
    case Command::Tadpole: o = run_tadpole(cfg); break;
    case Command::Beta: o = run_beta(cfg); break;
    case Command::Flow: o = run_flow(cfg); break;
    case Command::FixedPoint: o = run_fixed_point(cfg); break;
    case Command::Exponents: o = run_exponents(cfg); break;
    case Command::Scan: o = run_scan(cfg); break;
    case Command::PotentialFlow: o = run_potential_flow(cfg); break;
  }

  const Format fmt_out = cfg.effective_format();
  std::string payload;
  if (fmt_out == Format::Csv) {
    payload = o.csv;
  } else {
    json doc = {{"config", to_json(cfg)}, {"result", o.doc}, {"termination", o.termination}};
    payload = doc.dump(2) + "\n";
  }

  if (cfg.output.path) {
    write_file(*cfg.output.path, payload);
    json meta = {{"command", to_string(cfg.command)},
                 {"format", to_string(fmt_out)},
                 {"rows", o.rows},
                 {"exit_code", o.code},
                 {"termination", o.termination},
                 {"config", to_json(cfg)}};
    if (fmt_out == Format::Csv && o.doc.contains("stats")) meta["stats"] = o.doc["stats"];
    write_file(*cfg.output.path + ".meta.json", meta.dump(2) + "\n");
  } else {
    out << payload;
  }

  if (o.code != kOk) {
    err << "lfrg: " << to_string(cfg.command) << " did not complete: "
        << o.termination.value("detail", o.termination.value("kind", "")) << "\n";
  } else if (!cfg.output.quiet && cfg.output.path) {
    err << "lfrg: wrote " << o.rows << " rows to " << *cfg.output.path << "\n";
  }
  return o.code;
}

int entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_config(argc, argv);
    return run(cfg, out, err);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kOk;
  } catch (const UsageError& e) {
    err << "lfrg: usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidProblem& e) {
    err << "lfrg: invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "lfrg: I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const DomainError& e) {
    err << "lfrg: domain error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "lfrg: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace lfrg::cli

#include "lfrg/fixed_points.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace lfrg {

namespace {

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::vector<double> evaluate(const VectorField& f, std::span<const double> x) {
  std::vector<double> out(f.dimension);
  f.eval(x, out);
  if (!all_finite(out)) throw DomainError("vector field is not finite at this point");
  return out;
}

double half_squared(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return 0.5 * s;
}

Classification classify(const std::vector<std::complex<double>>& exponents) {
  double scale = 1.0;
  for (const auto& e : exponents) scale = std::max(scale, std::abs(e));
  Classification c;
  for (const auto& e : exponents) {
    if (e.real() > 1e-8 * scale) {
      ++c.relevant;
    } else if (e.real() < -1e-8 * scale) {
      ++c.irrelevant;
    } else {
      ++c.marginal;
    }
  }
  const int n = static_cast<int>(exponents.size());
  if (c.relevant == n) {
    c.kind = StabilityClass::UVAttractive;
  } else if (c.irrelevant == n) {
    c.kind = StabilityClass::IRAttractive;
  } else {
    c.kind = StabilityClass::Mixed;
  }
  return c;
}

std::vector<std::size_t> active_indices(const std::array<bool, 3>& active) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < 3; ++i) {
    if (active[i]) idx.push_back(i);
  }
  return idx;
}

CouplingVector embed(const CouplingVector& frozen, const std::vector<std::size_t>& idx,
                     std::span<const double> x, Scaling scaling) {
  auto v = frozen.values();
  for (std::size_t j = 0; j < idx.size(); ++j) v[idx[j]] = x[j];
  return CouplingVector::from(v, scaling);
}

std::vector<double> project(const CouplingVector& g, const std::vector<std::size_t>& idx) {
  std::vector<double> x;
  for (std::size_t i : idx) x.push_back(g[i]);
  return x;
}

void fill_stability(FixedPointReport& report, const LinearStability& lin) {
  report.stability_matrix = lin.jacobian;
  report.eigenvalues = lin.eigenvalues;
  report.exponents = lin.exponents;
  report.classification = lin.classification;
}

}  // namespace

std::string to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::UVAttractive: return "uv-attractive";
    case StabilityClass::IRAttractive: return "ir-attractive";
    case StabilityClass::Mixed: return "mixed";
  }
  return "mixed";
}

Eigen::MatrixXd fd_jacobian(const VectorField& f, std::span<const double> x, double rel_step,
                            double abs_step, double scale) {
  const std::size_t n = f.dimension;
  Eigen::MatrixXd J(n, n);
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> xm(x.begin(), x.end());
  for (std::size_t j = 0; j < n; ++j) {
    const double h = scale * std::max(rel_step * std::abs(x[j]), abs_step);
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    const auto fp = evaluate(f, xp);
    const auto fm = evaluate(f, xm);
    for (std::size_t i = 0; i < n; ++i) J(i, j) = (fp[i] - fm[i]) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return J;
}

RootResult newton_solve(const VectorField& f, std::vector<double> x, const NewtonOptions& opts) {
  if (x.size() != f.dimension) throw InvalidProblem("guess has the wrong dimension");
  auto F = evaluate(f, x);
  double residual = max_norm(F);
  double last_step = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    if (residual <= opts.tol && last_step <= opts.tol * (1.0 + max_norm(x))) {
      return {x, residual, iter};
    }
    if (iter == opts.max_iter) break;

    const Eigen::MatrixXd J = fd_jacobian(f, x, opts.fd_rel_step, opts.fd_abs_step);
    const Eigen::Map<const Eigen::VectorXd> Fv(F.data(), static_cast<Eigen::Index>(F.size()));
    const Eigen::VectorXd d = -J.completeOrthogonalDecomposition().solve(Fv);
    if (!d.allFinite()) throw NonConvergence("Newton direction is not finite", x, residual);

    const double phi0 = half_squared(F);
    double alpha = 1.0;
    bool accepted = false;
    std::vector<double> xt(x.size());
    std::vector<double> Ft;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt, alpha *= 0.5) {
      for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + alpha * d(static_cast<Eigen::Index>(i));
      try {
        Ft = evaluate(f, xt);
      } catch (const DomainError&) {
        continue;
      }
      if (half_squared(Ft) <= (1.0 - 2e-4 * alpha) * phi0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (residual <= opts.tol) return {x, residual, iter};
      throw NonConvergence("line search failed to reduce the residual", x, residual);
    }
    last_step = alpha * d.cwiseAbs().maxCoeff();
    x = xt;
    F = Ft;
    residual = max_norm(F);
  }
  throw NonConvergence("Newton did not converge in " + std::to_string(opts.max_iter) + " iterations",
                       x, residual);
}

LinearStability linearize(const VectorField& f, std::span<const double> x, const NewtonOptions& opts,
                          double fd_scale) {
  LinearStability lin;
  lin.jacobian = fd_jacobian(f, x, opts.fd_rel_step, opts.fd_abs_step, fd_scale);
  Eigen::EigenSolver<Eigen::MatrixXd> es(lin.jacobian, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigenvalue iteration failed");
  const auto& ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) lin.eigenvalues.push_back(ev(i));
  std::sort(lin.eigenvalues.begin(), lin.eigenvalues.end(),
            [](const auto& a, const auto& b) {
              return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
            });
  for (const auto& e : lin.eigenvalues) lin.exponents.push_back(-e);
  lin.classification = classify(lin.exponents);
  return lin;
}

// ---------------------------------------------------------------------------

VectorField as_vector_field(const BetaSystem& system, const CouplingVector& frozen, double t) {
  const auto idx = active_indices(system.active());
  const Scaling scaling = system.scaling();
  return {idx.size(), [&system, frozen, idx, scaling, t](std::span<const double> x, std::span<double> out) {
            const auto g = embed(frozen, idx, x, scaling);
            system.check_domain(t, g);
            const auto r = system.rate(t, g);
            for (std::size_t j = 0; j < idx.size(); ++j) out[j] = r[idx[j]];
          }};
}

FixedPointReport find_fixed_point(const BetaSystem& system, const CouplingVector& guess,
                                  const NewtonOptions& opts, double t) {
  CouplingVector start = guess;
  start.scaling = system.scaling();
  system.check_domain(t, start);
  const auto idx = active_indices(system.active());
  const auto field = as_vector_field(system, start, t);
  const auto root = newton_solve(field, project(start, idx), opts);

  FixedPointReport report;
  report.location = embed(start, idx, root.x, start.scaling);
  report.residual = root.residual;
  report.iterations = root.iterations;
  report.active = system.active();
  fill_stability(report, linearize(field, root.x, opts));
  return report;
}

FixedPointReport stability_analysis(const BetaSystem& system, const CouplingVector& fp,
                                    const NewtonOptions& opts, double fd_scale, double t) {
  CouplingVector at = fp;
  at.scaling = system.scaling();
  system.check_domain(t, at);
  const auto idx = active_indices(system.active());
  const auto field = as_vector_field(system, at, t);
  const auto x = project(at, idx);
  const double residual = max_norm(evaluate(field, x));
  if (residual > 1e-8) {
    throw InvalidProblem("stability analysis needs ||beta|| <= 1e-8 at the point, got " +
                         show(residual));
  }
  FixedPointReport report;
  report.location = at;
  report.residual = residual;
  report.active = system.active();
  fill_stability(report, linearize(field, x, opts, fd_scale));
  return report;
}

std::size_t GridSpec::size() const {
  const auto c = [](const GridAxis& a) { return static_cast<std::size_t>(std::max(a.count, 0)); };
  return c(U0) * c(m2) * c(lambda);
}

namespace {

double axis_value(const GridAxis& a, int i) {
  return a.count <= 1 ? a.lo : a.lo + (a.hi - a.lo) * i / (a.count - 1);
}

enum class StartOutcome { Converged, OutsideDomain, Failed };

struct StartResult {
  StartOutcome outcome = StartOutcome::Failed;
  std::optional<FixedPointReport> report;
};

StartResult run_start(const BetaSystem& system, const CouplingVector& guess,
                      const NewtonOptions& opts, double t) {
  StartResult r;
  if (!system.in_domain(t, guess)) {
    r.outcome = StartOutcome::OutsideDomain;
    return r;
  }
  try {
    r.report = find_fixed_point(system, guess, opts, t);
    r.outcome = StartOutcome::Converged;
  } catch (const std::exception&) {
    r.outcome = StartOutcome::Failed;
  }
  return r;
}

}  // namespace

ScanResult scan_fixed_points(const BetaSystem& system, const GridSpec& grid,
                             const NewtonOptions& opts, Execution exec, double t) {
  ScanResult result;
  const std::size_t total = grid.size();
  if (total == 0) return result;

  std::vector<CouplingVector> starts;
  starts.reserve(total);
  for (int i = 0; i < grid.U0.count; ++i) {
    for (int j = 0; j < grid.m2.count; ++j) {
      for (int l = 0; l < grid.lambda.count; ++l) {
        starts.push_back({axis_value(grid.U0, i), axis_value(grid.m2, j),
                          axis_value(grid.lambda, l), system.scaling()});
      }
    }
  }

  std::vector<StartResult> outcomes(starts.size());
  const auto n = static_cast<long long>(starts.size());
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long s = 0; s < n; ++s) outcomes[s] = run_start(system, starts[s], opts, t);
  } else {
    for (long long s = 0; s < n; ++s) outcomes[s] = run_start(system, starts[s], opts, t);
  }

  const auto idx = active_indices(system.active());
  result.starts = static_cast<int>(starts.size());
  for (auto& o : outcomes) {
    if (o.outcome == StartOutcome::OutsideDomain) {
      ++result.outside_domain;
      continue;
    }
    if (o.outcome == StartOutcome::Failed) {
      ++result.failed;
      continue;
    }
    const auto& rep = *o.report;
    auto same = std::find_if(result.roots.begin(), result.roots.end(), [&](const FixedPointReport& r) {
      double d = 0.0;
      for (std::size_t i : idx) d = std::max(d, std::abs(r.location[i] - rep.location[i]));
      return d <= kDedupRadius;
    });
    if (same == result.roots.end()) {
      result.roots.push_back(rep);
    } else if (rep.residual < same->residual) {
      *same = rep;
    }
  }
  std::stable_sort(result.roots.begin(), result.roots.end(),
                   [](const auto& a, const auto& b) { return a.residual < b.residual; });
  return result;
}

}  // namespace lfrg

#include "lfrg/potential.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lfrg/errors.hpp"
#include "lfrg/tadpole.hpp"

namespace lfrg {

void validate(const PotentialGrid& grid) {
  if (grid.values.size() < kMinGridPoints) {
    throw InvalidProblem("potential grid needs at least 16 points");
  }
  if (!(grid.rho_max > 0.0) || !std::isfinite(grid.rho_max)) {
    throw InvalidProblem("rho_max must be positive");
  }
  if (!(grid.k > 0.0)) throw InvalidProblem("grid scale k must be positive");
  for (double v : grid.values) {
    if (!std::isfinite(v)) throw InvalidProblem("potential values must be finite");
  }
}

PotentialGrid make_grid(double rho_max, std::size_t N, double k,
                        const std::function<double(double)>& U) {
  PotentialGrid g{rho_max, std::vector<double>(N), k};
  if (N < kMinGridPoints) throw InvalidProblem("potential grid needs at least 16 points");
  for (std::size_t i = 0; i < N; ++i) g.values[i] = U(g.rho(i));
  validate(g);
  return g;
}

PotentialGrid quartic_grid(double rho_max, std::size_t N, double k, const CouplingVector& c) {
  return make_grid(rho_max, N, k,
                   [c](double r) { return c.U0 + c.m2 * r + c.lambda * r * r / 6.0; });
}

double default_rho_max(double m2, double lambda, double Lambda) {
  constexpr double eps = 1e-12;
  return 10.0 * std::max(std::abs(m2), Lambda * Lambda) / std::max(lambda, eps);
}

namespace {

struct Derivs {
  double d1, d2;
};

Derivs derivatives_at(std::span<const double> U, double h, std::size_t i) {
  const std::size_t n = U.size();
  if (i == 0) {
    return {(-3.0 * U[0] + 4.0 * U[1] - U[2]) / (2.0 * h),
            (2.0 * U[0] - 5.0 * U[1] + 4.0 * U[2] - U[3]) / (h * h)};
  }
  if (i == n - 1) {
    return {(3.0 * U[n - 1] - 4.0 * U[n - 2] + U[n - 3]) / (2.0 * h),
            (2.0 * U[n - 1] - 5.0 * U[n - 2] + 4.0 * U[n - 3] - U[n - 4]) / (h * h)};
  }
  return {(U[i + 1] - U[i - 1]) / (2.0 * h), (U[i + 1] - 2.0 * U[i] + U[i - 1]) / (h * h)};
}

double mass_squared_at(std::span<const double> U, double h, double k, std::size_t i) {
  const auto d = derivatives_at(U, h, i);
  const double rho = h * static_cast<double>(i);
  return k * k + d.d1 + 2.0 * rho * d.d2;
}

}  // namespace

void rho_derivatives(std::span<const double> U, double h, std::span<double> dU,
                     std::span<double> d2U) {
  for (std::size_t i = 0; i < U.size(); ++i) {
    const auto d = derivatives_at(U, h, i);
    dU[i] = d.d1;
    d2U[i] = d.d2;
  }
}

std::vector<double> mass_squared_profile(const PotentialGrid& grid) {
  validate(grid);
  std::vector<double> M2(grid.size());
  const double h = grid.spacing();
  for (std::size_t i = 0; i < grid.size(); ++i) M2[i] = mass_squared_at(grid.values, h, grid.k, i);
  return M2;
}

CouplingVector extract_couplings(const PotentialGrid& grid) {
  validate(grid);
  const auto d = derivatives_at(grid.values, grid.spacing(), 0);
  return {grid.values[0], d.d1, 3.0 * d.d2, Scaling::Dimensionful};
}

void evaluate_source(std::span<const double> U, double h, double k, const Background& bg,
                     std::span<double> out, Execution exec) {
  const auto n = static_cast<long long>(U.size());
  const double k2 = k * k;
  if (exec == Execution::Serial) {
    for (long long i = 0; i < n; ++i) {
      out[i] = k2 * wick_square(mass_squared_at(U, h, k, i), bg, k).value;
    }
    return;
  }

  bool failed = false;
  std::string message;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    try {
      out[i] = k2 * wick_square(mass_squared_at(U, h, k, i), bg, k).value;
    } catch (const std::exception& e) {
#pragma omp critical(lfrg_source_error)
      {
        if (!failed) {
          failed = true;
          message = "node " + std::to_string(i) + ": " + e.what();
        }
      }
    }
  }
  if (failed) throw DomainError(message);
}

PotentialFlow flow_potential(const PotentialGrid& initial, const Background& bg, double t1,
                             const PotentialFlowOptions& opts) {
  validate(initial);
  validate(bg);
  if (!(opts.Lambda > 0.0)) throw InvalidProblem("Lambda must be positive");
  const double t0 = std::log(initial.k / opts.Lambda);
  const double h = initial.spacing();
  const double Lambda = opts.Lambda;
  const Execution exec = opts.exec;

  const OdeSystem ode{
      initial.size(),
      [&bg, h, Lambda, exec](double t, std::span<const double> y, std::span<double> dy) {
        evaluate_source(y, h, Lambda * std::exp(t), bg, dy, exec);
      },
      nullptr,
  };
  const auto sol = integrate_ode(ode, t0, t1, initial.values, opts.integrator);

  PotentialFlow flow;
  flow.termination = sol.termination;
  flow.stats = sol.stats;
  const auto& cps = opts.integrator.checkpoints;
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    const bool first = i == 0;
    const bool last = i + 1 == sol.t.size();
    const bool checkpoint = std::find(cps.begin(), cps.end(), sol.t[i]) != cps.end();
    if (first || last || checkpoint) {
      flow.times.push_back(sol.t[i]);
      flow.snapshots.push_back({initial.rho_max, sol.y[i], Lambda * std::exp(sol.t[i])});
    }
  }
  return flow;
}

}  // namespace lfrg

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lfrg/background.hpp"
#include "lfrg/couplings.hpp"
#include "lfrg/fixed_points.hpp"
#include "lfrg/ode.hpp"

namespace lfrg {

/// U(rho) sampled on rho_i = i h, h = rho_max/(N-1), N >= 16, at scale k.
/// The potential is stored as a function of rho = phi^2/2 only.
struct PotentialGrid {
  double rho_max = 1.0;
  std::vector<double> values;
  double k = 1.0;

  std::size_t size() const { return values.size(); }
  double spacing() const { return rho_max / static_cast<double>(values.size() - 1); }
  double rho(std::size_t i) const { return spacing() * static_cast<double>(i); }
};

constexpr std::size_t kMinGridPoints = 16;

/// Throws InvalidProblem when N < 16, rho_max <= 0 or a value is not finite.
void validate(const PotentialGrid& grid);

PotentialGrid make_grid(double rho_max, std::size_t N, double k,
                        const std::function<double(double)>& U);

/// Grid holding U = U0 + m2 rho + lambda rho^2/6.
PotentialGrid quartic_grid(double rho_max, std::size_t N, double k, const CouplingVector& g);

/// 10 max(|m2|, Lambda^2) / max(lambda, eps).
double default_rho_max(double m2, double lambda, double Lambda);

/// First and second rho-derivatives: central in the interior, one-sided
/// second-order at both ends.
void rho_derivatives(std::span<const double> U, double h, std::span<double> dU, std::span<double> d2U);

/// M^2(rho) = k^2 + U'(rho) + 2 rho U''(rho).
std::vector<double> mass_squared_profile(const PotentialGrid& grid);

/// (U(0), U'(0), 3 U''(0)) from the one-sided stencils at rho = 0.
CouplingVector extract_couplings(const PotentialGrid& grid);

/// dU_i/dt = k^2 W(M^2(rho_i); bg). The node loop is the OpenMP kernel;
/// Execution::Serial is the reference path. Throws DomainError if any node
/// leaves the kernel domain.
void evaluate_source(std::span<const double> U, double h, double k, const Background& bg,
                     std::span<double> out, Execution exec = Execution::Parallel);

struct PotentialFlowOptions {
  IntegratorOptions integrator;
  double Lambda = 1.0;
  Execution exec = Execution::Parallel;
};

struct PotentialFlow {
  std::vector<PotentialGrid> snapshots;  // initial, every checkpoint reached, final
  std::vector<double> times;
  Termination termination = termination::ReachedEnd{};
  IntegratorStats stats;
};

/// Method of lines from t0 = log(initial.k/Lambda) to t1. Snapshots are taken at
/// integrator.checkpoints (steps land on them exactly).
PotentialFlow flow_potential(const PotentialGrid& initial, const Background& bg, double t1,
                             const PotentialFlowOptions& opts = {});

}  // namespace lfrg

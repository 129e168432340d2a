#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lfrg/couplings.hpp"
#include "lfrg/errors.hpp"
#include "lfrg/flow_systems.hpp"

namespace lfrg {

/// F: R^n -> R^n. Throws DomainError outside its domain.
struct VectorField {
  std::size_t dimension = 0;
  std::function<void(std::span<const double> x, std::span<double> out)> eval;
};

struct NewtonOptions {
  double tol = 1e-12;          // on the max-norm of the residual
  int max_iter = 200;
  double fd_rel_step = 1e-6;   // Jacobian columns: h = max(fd_rel_step |x_j|, fd_abs_step)
  double fd_abs_step = 1e-8;
  int max_backtracks = 30;
};

/// Thrown when Newton stops without meeting the tolerance.
class NonConvergence : public ConvergenceError {
 public:
  NonConvergence(const std::string& what, std::vector<double> last, double residual)
      : ConvergenceError(what), last_iterate(std::move(last)), residual(residual) {}
  std::vector<double> last_iterate;
  double residual;
};

struct RootResult {
  std::vector<double> x;
  double residual = 0.0;
  int iterations = 0;
};

/// Central-difference Jacobian, step h_j = scale * max(rel |x_j|, abs).
Eigen::MatrixXd fd_jacobian(const VectorField& f, std::span<const double> x, double rel_step,
                            double abs_step, double scale = 1.0);

/// Damped Newton with Armijo backtracking. Converged once ||F||_inf <= tol and
/// the last Newton update is below tol (1 + ||x||_inf); the second condition
/// keeps iterating towards degenerate roots such as the Gaussian one.
RootResult newton_solve(const VectorField& f, std::vector<double> guess,
                        const NewtonOptions& opts = {});

enum class StabilityClass { UVAttractive, Mixed, IRAttractive };
std::string to_string(StabilityClass c);

struct Classification {
  StabilityClass kind = StabilityClass::Mixed;
  int relevant = 0;    // Re theta > 0
  int irrelevant = 0;  // Re theta < 0
  int marginal = 0;
};

/// Linearization around a zero of a vector field.
/// Critical exponents follow theta_i = -eigenvalue_i, so relevant directions
/// have theta > 0.
struct LinearStability {
  Eigen::MatrixXd jacobian;
  std::vector<std::complex<double>> eigenvalues;  // sorted by real part, descending
  std::vector<std::complex<double>> exponents;
  Classification classification;
};

LinearStability linearize(const VectorField& f, std::span<const double> x,
                          const NewtonOptions& opts = {}, double fd_scale = 1.0);

// ---------------------------------------------------------------------------
// Beta-system front end
// ---------------------------------------------------------------------------

struct FixedPointReport {
  CouplingVector location;
  double residual = 0.0;
  int iterations = 0;
  std::array<bool, 3> active{true, true, true};
  Eigen::MatrixXd stability_matrix;  // d beta_i / d g~_j over the active couplings
  std::vector<std::complex<double>> eigenvalues;
  std::vector<std::complex<double>> exponents;
  Classification classification;
};

/// The beta system at fixed t, restricted to its active couplings; inactive
/// couplings are frozen at the values in `frozen`.
VectorField as_vector_field(const BetaSystem& system, const CouplingVector& frozen, double t = 0.0);

FixedPointReport find_fixed_point(const BetaSystem& system, const CouplingVector& guess,
                                  const NewtonOptions& opts = {}, double t = 0.0);

/// Requires ||beta(fp)||_inf <= 1e-8 (InvalidProblem otherwise).
FixedPointReport stability_analysis(const BetaSystem& system, const CouplingVector& fp,
                                    const NewtonOptions& opts = {}, double fd_scale = 1.0,
                                    double t = 0.0);

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;  // count == 1 uses lo only
};

struct GridSpec {
  GridAxis U0{0.0, 0.0, 1};
  GridAxis m2{0.0, 0.0, 1};
  GridAxis lambda{0.0, 0.0, 1};
  std::size_t size() const;
};

enum class Execution { Serial, Parallel };

struct ScanResult {
  std::vector<FixedPointReport> roots;  // deduplicated, sorted by residual
  int starts = 0;
  int outside_domain = 0;
  int failed = 0;
};

constexpr double kDedupRadius = 1e-6;

/// Newton from every grid node; roots closer than kDedupRadius (max-norm over
/// active couplings) are merged.
ScanResult scan_fixed_points(const BetaSystem& system, const GridSpec& grid,
                             const NewtonOptions& opts = {}, Execution exec = Execution::Parallel,
                             double t = 0.0);

}  // namespace lfrg

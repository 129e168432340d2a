#pragma once

#include <functional>
#include <vector>

namespace lfrg {

/// Order of a polygamma derivative: 0 (digamma), 1 (trigamma), 2 (tetragamma).
class PolyOrder {
 public:
  explicit PolyOrder(int n);
  int value() const { return n_; }

 private:
  int n_;
};

/// psi^(n)(x). Throws PoleError for x a non-positive integer and DomainError
/// for x so negative that the upward recurrence is not used (x < -1e6).
double polygamma(PolyOrder order, double x);
inline double polygamma(int order, double x) { return polygamma(PolyOrder(order), x); }

inline double digamma(double x) { return polygamma(0, x); }
inline double trigamma(double x) { return polygamma(1, x); }
inline double tetragamma(double x) { return polygamma(2, x); }

/// Riemann zeta(3).
constexpr double zeta3() { return 1.2020569031595942854; }

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_panels = 10000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod integration of f over [a, b].
/// Throws ConvergenceError when the panel budget is exhausted.
QuadratureResult integrate_gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                                         const QuadratureOptions& opts = {});

/// Same, with the initial partition given by the sorted break points.
QuadratureResult integrate_gauss_kronrod_with_breaks(const std::function<double(double)>& f,
                                                     std::vector<double> breaks,
                                                     const QuadratureOptions& opts = {});

/// Thermal part of the coincidence-limit Wick square in four dimensions,
///
///   T_B(M2, beta) = 1/(2 pi^2) int_0^inf dp p^2 / sqrt(p^2 + M2) / (e^{beta p} - 1).
///
/// Evaluated in u = beta p on [0, 50]. beta = +inf returns 0.
double bose_tadpole(double M2, double beta, const QuadratureOptions& opts = {});

/// d^n T_B / d(M2)^n for n = 1, 2, differentiated under the integral sign.
/// Requires M2 > 0.
double bose_tadpole_mass_derivative(int order, double M2, double beta,
                                    const QuadratureOptions& opts = {});

}  // namespace lfrg

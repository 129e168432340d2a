#pragma once

#include "lfrg/background.hpp"
#include "lfrg/specfun.hpp"

namespace lfrg {

/// Renormalized coincidence-limit Wick square <chi^2> at fluctuation mass M2,
/// in units of [mass]^(d-2).
struct TadpoleValue {
  double value = 0.0;
  double M2 = 0.0;
};

/// Even-dimensional Minkowski vacuum, d in {2, 4, 6}:
///   (-1)^{d/2} 2 / (Gamma(d/2) (4 pi)^{d/2}) M^{d-2} log(M^2/mu^2).
/// This is twice the <chi^2/2> coincidence limit; for d = 4 it is
/// M^2/(8 pi^2) log(M^2/mu^2).
TadpoleValue minkowski_vacuum_wick_square(double M2, double mu2, int d);

/// Four-dimensional thermal state: vacuum part at mu^2(k) plus the Bose part.
TadpoleValue thermal_wick_square(double M2, const Thermal& bg, double k,
                                 const QuadratureOptions& quad = {});

/// Bunch-Davies state with curvature coupling xi:
///   -(1/16 pi^2) { -2H^2/3 + [M^2 + 12(xi - 1/6) H^2]
///                  [psi(3/2 + nu) + psi(3/2 - nu) + log(12 H^2/mu^2)] },
///   nu = sqrt(9/4 - 12 xi + M^2/H^2).
/// Throws DomainError for imaginary nu and PoleError when 3/2 - nu is a
/// non-positive integer (e.g. the massless minimally coupled field).
TadpoleValue desitter_wick_square(double M2, const DeSitter& bg, double k);

/// The de Sitter index nu for mass M2; DomainError when nu^2 < 0.
double desitter_nu(double M2, double H2, double xi);

/// Dispatch on the background. Minkowski with d != 4 is allowed here too.
TadpoleValue wick_square(double M2, const Background& bg, double k,
                         const QuadratureOptions& quad = {});

}  // namespace lfrg

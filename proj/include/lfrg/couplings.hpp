#pragma once

#include <array>
#include <string>

namespace lfrg {

/// Which rescaling the coupling values are expressed in.
///   Minkowski:    U0/k^4,       m2/k^2,  lambda
///   ThermalHighT: U0 beta^2/k,  m2/k^2,  lambda/(beta k)
///   DeSitter:     U0/H^4,       m2/H^2,  k^2 lambda/H^2
enum class Scaling { Dimensionful, Minkowski, ThermalHighT, DeSitter };

std::string to_string(Scaling s);

/// Running couplings of U = U0 + m2 rho + lambda rho^2/6, always ordered
/// (U0, m2, lambda). Also used for rates d/dt of the same couplings.
struct CouplingVector {
  double U0 = 0.0;
  double m2 = 0.0;
  double lambda = 0.0;
  Scaling scaling = Scaling::Dimensionful;

  bool dimensionless() const { return scaling != Scaling::Dimensionful; }

  std::array<double, 3> values() const { return {U0, m2, lambda}; }
  double operator[](std::size_t i) const { return values()[i]; }

  static CouplingVector from(const std::array<double, 3>& v, Scaling s) {
    return {v[0], v[1], v[2], s};
  }
};

/// The dimensionful scales a rescaling refers to.
struct ScaleContext {
  Scaling scaling = Scaling::Dimensionful;
  double beta = 1.0;  // ThermalHighT
  double H2 = 1.0;    // DeSitter
};

/// Rescale dimensionful couplings at scale k.
CouplingVector to_dimensionless(const CouplingVector& g, double k, const ScaleContext& ctx);

/// Inverse of to_dimensionless.
CouplingVector to_dimensionful(const CouplingVector& g, double k, const ScaleContext& ctx);

/// Chain rule: the dimensionless rate dg~/dt given dimensionful couplings g and
/// their rate dg/dt at scale k (t = log k/Lambda), including the scaling terms.
CouplingVector dimensionless_rate(const CouplingVector& g, const CouplingVector& rate, double k,
                                  const ScaleContext& ctx);

}  // namespace lfrg

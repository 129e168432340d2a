#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>

#include "lfrg/background.hpp"
#include "lfrg/couplings.hpp"

namespace lfrg {

/// Which sign of the trigamma difference to use in the de Sitter betas.
/// PaperTranscribed keeps psi'(3/2-nu) - psi'(3/2+nu) in the leading terms as
/// printed; KernelConsistent uses the sign obtained by differentiating the
/// de Sitter Wick square, psi'(3/2+nu) - psi'(3/2-nu).
enum class DeSitterSign { PaperTranscribed, KernelConsistent };

std::string to_string(DeSitterSign s);

constexpr double kDefaultFdStep = 1e-4;

namespace beta_mode {
struct Transcribed {};
/// Central differences in rho of the source k^2 W(M^2(rho)); fd_step is the
/// step relative to M^2(0), in [1e-8, 1e-2].
struct KernelDerived {
  double fd_step = kDefaultFdStep;
};
}  // namespace beta_mode

using BetaMode = std::variant<beta_mode::Transcribed, beta_mode::KernelDerived>;

// ---------------------------------------------------------------------------
// Transcribed beta functions (all in d = 4)
// ---------------------------------------------------------------------------

/// Dimensionless Minkowski-vacuum flow, k = Lambda e^t:
///   dU~/dt  = -4U~ + (1+m~2)[log(1+m~2) + log(k^2/mu^2)]/(8 pi^2)
///   dm~2/dt = -2m~2 + lambda~ [1 + log(1+m~2) + log(k^2/mu^2)]/(8 pi^2)
///   dl~/dt  = 3 lambda~^2 / (8 pi^2 (1+m~2))
CouplingVector beta_minkowski_vacuum(const CouplingVector& g, double t, const MuMode& mu,
                                     double Lambda = 1.0);

/// Dimensionful Minkowski-vacuum flow k d/dk of (U0, m2, lambda) at scale k.
CouplingVector beta_minkowski_vacuum_dimensionful(const CouplingVector& g, double k,
                                                  const MuMode& mu);

/// High-temperature flow with the vacuum part dropped:
///   dU~/dt  = -U~ + zeta(3)/(2 pi^2)
///   dm~2/dt = -2m~2 - lambda~ / (2 pi^2 sqrt(1+m~2))
///   dl~/dt  = -lambda~ + 3 lambda~^2 / (8 pi^2 (1+m~2)^{3/2})
CouplingVector beta_thermal_highT(const CouplingVector& g);

/// Exact dimensionful thermal flow: vacuum part plus the Bose part with its
/// first two mass derivatives evaluated by quadrature.
CouplingVector beta_thermal_exact(const CouplingVector& g, double k, const Thermal& bg);

struct DeSitterOptions {
  DeSitterSign sign = DeSitterSign::PaperTranscribed;
  double Lambda = 1.0;
  /// When set, k^2/H^2 is this constant instead of Lambda^2 e^{2t}/H^2.
  std::optional<double> k2_over_H2;
  /// Report the vacuum-energy flow k^2 W/H^4 (not part of the printed system).
  bool include_vacuum_energy = false;
};

/// Dimensionless de Sitter flow in m~2 = m2/H^2 and lambda~ = k^2 lambda/H^2.
/// The U0 rate is 0 unless include_vacuum_energy is set.
CouplingVector beta_desitter(const CouplingVector& g, double t, const DeSitter& bg,
                             const DeSitterOptions& opts = {});

/// Dimensionful de Sitter flow at scale k.
CouplingVector beta_desitter_dimensionful(const CouplingVector& g, double k, const DeSitter& bg,
                                          DeSitterSign sign, bool include_vacuum_energy = false);

/// Rates of dimensionful couplings from the source S(rho) = k^2 W(k^2 + m2 + lambda rho):
/// dU0/dt = S(0), dm2/dt = S'(0), dlambda/dt = 3 S''(0).
CouplingVector beta_from_kernel(const CouplingVector& g, double k, const Background& bg,
                                double fd_step = kDefaultFdStep);

// ---------------------------------------------------------------------------
// Registered systems
// ---------------------------------------------------------------------------

namespace system {
struct MinkowskiDimensionless {
  MuMode mu = mu::TiedToK{};
};
struct MinkowskiDimensionful {
  MuMode mu = mu::TiedToK{};
};
struct ThermalHighT {};
struct ThermalExact {
  Thermal background;
};
struct DeSitterDimensionless {
  DeSitter background;
  DeSitterSign sign = DeSitterSign::PaperTranscribed;
  std::optional<double> k2_over_H2;
  bool include_vacuum_energy = false;
};
struct DeSitterDimensionful {
  DeSitter background;
  DeSitterSign sign = DeSitterSign::PaperTranscribed;
  bool include_vacuum_energy = false;
};
/// Dimensionful rates from beta_from_kernel.
struct Kernel {
  Background background;
  double fd_step = kDefaultFdStep;
};
}  // namespace system

using SystemSpec =
    std::variant<system::MinkowskiDimensionless, system::MinkowskiDimensionful,
                 system::ThermalHighT, system::ThermalExact, system::DeSitterDimensionless,
                 system::DeSitterDimensionful, system::Kernel>;

/// A beta system together with its reference scale Lambda (k = Lambda e^t).
class BetaSystem {
 public:
  explicit BetaSystem(SystemSpec spec, double Lambda = 1.0);

  CouplingVector rate(double t, const CouplingVector& g) const;

  /// Throws DomainError when g lies outside the system's domain at time t
  /// (1 + m~2 <= 0, k^2 + m2 <= 0, imaginary or vanishing nu, psi pole).
  void check_domain(double t, const CouplingVector& g) const;
  bool in_domain(double t, const CouplingVector& g) const;

  /// Couplings whose rate is not identically zero.
  std::array<bool, 3> active() const;
  std::size_t active_dimension() const;

  Scaling scaling() const;
  bool autonomous() const;
  double Lambda() const { return Lambda_; }
  double k(double t) const;
  const SystemSpec& spec() const { return spec_; }
  std::string name() const;

 private:
  SystemSpec spec_;
  double Lambda_;
};

}  // namespace lfrg

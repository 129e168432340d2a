#include "lfrg/flow_systems.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lfrg/errors.hpp"
#include "lfrg/specfun.hpp"
#include "lfrg/tadpole.hpp"

namespace lfrg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

double log_k2_over_mu2(const MuMode& mode, double k) {
  return std::log(k * k / resolve_mu2(mode, k));
}

void require_positive_mass_ratio(double one_plus_m2) {
  if (!(one_plus_m2 > 0.0)) {
    throw DomainError("beta system needs 1 + m~2 > 0, got " + show(one_plus_m2));
  }
}

// Digamma/trigamma/tetragamma combinations at 3/2 +- nu.
struct DeSitterPsi {
  double nu;
  double psi_sum;       // psi(3/2-nu) + psi(3/2+nu)
  double trigamma_diff;  // psi'(3/2-nu) - psi'(3/2+nu), as printed
  double tetragamma_sum;  // psi''(3/2-nu) + psi''(3/2+nu)
};

DeSitterPsi desitter_psi(double nu2) {
  if (!(nu2 > 0.0)) {
    throw DomainError("de Sitter beta functions need nu^2 > 0, got " + show(nu2));
  }
  const double nu = std::sqrt(nu2);
  const double lo = 1.5 - nu;
  const double hi = 1.5 + nu;
  return {nu, digamma(lo) + digamma(hi), trigamma(lo) - trigamma(hi),
          tetragamma(lo) + tetragamma(hi)};
}

// Braces of the de Sitter betas in terms of c = (k^2 + m^2)/H^2 + 12(xi - 1/6):
//   mass:    log(12H^2/mu^2) + psi_sum + s c/(2 nu) D
//   quartic: s D + c/(4 nu^2) [D + nu T]
struct DeSitterBraces {
  double mass;
  double quartic;
  double nu;
  double psi_part;  // log term + psi_sum, for the vacuum-energy rate
};

DeSitterBraces desitter_braces(double c, double nu2, double log_term, DeSitterSign sign) {
  const auto p = desitter_psi(nu2);
  const double s = sign == DeSitterSign::PaperTranscribed ? 1.0 : -1.0;
  const double nu = p.nu;
  DeSitterBraces b{};
  b.nu = nu;
  b.psi_part = log_term + p.psi_sum;
  b.mass = b.psi_part + s * c / (2.0 * nu) * p.trigamma_diff;
  b.quartic = s * p.trigamma_diff +
              c / (4.0 * nu * nu) * (p.trigamma_diff + nu * p.tetragamma_sum);
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scaling conventions
// ---------------------------------------------------------------------------

std::string to_string(Scaling s) {
  switch (s) {
    case Scaling::Dimensionful: return "dimensionful";
    case Scaling::Minkowski: return "minkowski";
    case Scaling::ThermalHighT: return "thermal-high-t";
    case Scaling::DeSitter: return "de-sitter";
  }
  return "unknown";
}

std::string to_string(DeSitterSign s) {
  return s == DeSitterSign::PaperTranscribed ? "paper-transcribed" : "kernel-consistent";
}

CouplingVector to_dimensionless(const CouplingVector& g, double k, const ScaleContext& ctx) {
  if (g.dimensionless()) throw std::invalid_argument("couplings are already dimensionless");
  const double k2 = k * k;
  switch (ctx.scaling) {
    case Scaling::Dimensionful: return g;
    case Scaling::Minkowski: return {g.U0 / (k2 * k2), g.m2 / k2, g.lambda, ctx.scaling};
    case Scaling::ThermalHighT:
      return {g.U0 * ctx.beta * ctx.beta / k, g.m2 / k2, g.lambda / (ctx.beta * k), ctx.scaling};
    case Scaling::DeSitter:
      return {g.U0 / (ctx.H2 * ctx.H2), g.m2 / ctx.H2, k2 * g.lambda / ctx.H2, ctx.scaling};
  }
  return g;
}

CouplingVector to_dimensionful(const CouplingVector& g, double k, const ScaleContext& ctx) {
  const double k2 = k * k;
  switch (g.scaling) {
    case Scaling::Dimensionful: return g;
    case Scaling::Minkowski: return {g.U0 * k2 * k2, g.m2 * k2, g.lambda, Scaling::Dimensionful};
    case Scaling::ThermalHighT:
      return {g.U0 * k / (ctx.beta * ctx.beta), g.m2 * k2, g.lambda * ctx.beta * k,
              Scaling::Dimensionful};
    case Scaling::DeSitter:
      return {g.U0 * ctx.H2 * ctx.H2, g.m2 * ctx.H2, g.lambda * ctx.H2 / k2,
              Scaling::Dimensionful};
  }
  return g;
}

CouplingVector dimensionless_rate(const CouplingVector& g, const CouplingVector& rate, double k,
                                  const ScaleContext& ctx) {
  const auto gt = to_dimensionless(g, k, ctx);
  const double k2 = k * k;
  switch (ctx.scaling) {
    case Scaling::Dimensionful: return rate;
    case Scaling::Minkowski:
      return {rate.U0 / (k2 * k2) - 4.0 * gt.U0, rate.m2 / k2 - 2.0 * gt.m2, rate.lambda,
              ctx.scaling};
    case Scaling::ThermalHighT:
      return {rate.U0 * ctx.beta * ctx.beta / k - gt.U0, rate.m2 / k2 - 2.0 * gt.m2,
              rate.lambda / (ctx.beta * k) - gt.lambda, ctx.scaling};
    case Scaling::DeSitter:
      return {rate.U0 / (ctx.H2 * ctx.H2), rate.m2 / ctx.H2,
              2.0 * gt.lambda + k2 * rate.lambda / ctx.H2, ctx.scaling};
  }
  return rate;
}

// ---------------------------------------------------------------------------
// Minkowski vacuum
// ---------------------------------------------------------------------------

CouplingVector beta_minkowski_vacuum(const CouplingVector& g, double t, const MuMode& mu,
                                     double Lambda) {
  const double a = 1.0 + g.m2;
  require_positive_mass_ratio(a);
  const double k = Lambda * std::exp(t);
  const double L = std::log(a) + log_k2_over_mu2(mu, k);
  return {-4.0 * g.U0 + a * L / (8.0 * kPi2), -2.0 * g.m2 + g.lambda * (1.0 + L) / (8.0 * kPi2),
          3.0 * g.lambda * g.lambda / (8.0 * kPi2 * a), Scaling::Minkowski};
}

CouplingVector beta_minkowski_vacuum_dimensionful(const CouplingVector& g, double k,
                                                  const MuMode& mu) {
  const double k2 = k * k;
  const double M2 = k2 + g.m2;
  if (!(M2 > 0.0)) throw DomainError("Minkowski flow needs k^2 + m^2 > 0");
  const double L = std::log(M2 / resolve_mu2(mu, k));
  return {k2 * M2 * L / (8.0 * kPi2), k2 * (1.0 + L) * g.lambda / (8.0 * kPi2),
          3.0 * k2 * g.lambda * g.lambda / (8.0 * kPi2 * M2), Scaling::Dimensionful};
}

// ---------------------------------------------------------------------------
// Thermal
// ---------------------------------------------------------------------------

CouplingVector beta_thermal_highT(const CouplingVector& g) {
  const double a = 1.0 + g.m2;
  require_positive_mass_ratio(a);
  const double sa = std::sqrt(a);
  return {-g.U0 + zeta3() / (2.0 * kPi2), -2.0 * g.m2 - g.lambda / (2.0 * kPi2 * sa),
          -g.lambda + 3.0 * g.lambda * g.lambda / (8.0 * kPi2 * a * sa), Scaling::ThermalHighT};
}

CouplingVector beta_thermal_exact(const CouplingVector& g, double k, const Thermal& bg) {
  const double k2 = k * k;
  const double M2 = k2 + g.m2;
  if (!(M2 > 0.0)) throw DomainError("thermal flow needs k^2 + m^2 > 0");
  const QuadratureOptions quad{.rel_tol = 1e-12};
  const double L = std::log(M2 / resolve_mu2(bg.mu, k));
  const double w0 = M2 * L / (8.0 * kPi2) + bose_tadpole(M2, bg.beta, quad);
  const double w1 = (1.0 + L) / (8.0 * kPi2) + bose_tadpole_mass_derivative(1, M2, bg.beta, quad);
  const double w2 = 1.0 / (8.0 * kPi2 * M2) + bose_tadpole_mass_derivative(2, M2, bg.beta, quad);
  return {k2 * w0, k2 * g.lambda * w1, 3.0 * k2 * g.lambda * g.lambda * w2, Scaling::Dimensionful};
}

// ---------------------------------------------------------------------------
// de Sitter
// ---------------------------------------------------------------------------

CouplingVector beta_desitter(const CouplingVector& g, double t, const DeSitter& bg,
                             const DeSitterOptions& opts) {
  const double k = opts.Lambda * std::exp(t);
  const double k2_H2 = opts.k2_over_H2.value_or(k * k / bg.H2);
  const double c = k2_H2 + g.m2 + 12.0 * (bg.xi - 1.0 / 6.0);
  const double nu2 = 9.0 / 4.0 - 12.0 * bg.xi + k2_H2 + g.m2;
  const double log_term = std::log(12.0 * bg.H2 / resolve_mu2(bg.mu, k, bg.H2));
  const auto b = desitter_braces(c, nu2, log_term, opts.sign);

  CouplingVector r{0.0, 0.0, 0.0, Scaling::DeSitter};
  r.m2 = -g.lambda / (16.0 * kPi2) * b.mass;
  r.lambda = 2.0 * g.lambda - 3.0 * g.lambda * g.lambda / (16.0 * kPi2 * b.nu) * b.quartic;
  if (opts.include_vacuum_energy) {
    // k^2 W / H^4 with W/H^2 = -(1/16 pi^2)(-2/3 + c (log + psi_sum))
    r.U0 = -k2_H2 / (16.0 * kPi2) * (-2.0 / 3.0 + c * b.psi_part);
  }
  return r;
}

CouplingVector beta_desitter_dimensionful(const CouplingVector& g, double k, const DeSitter& bg,
                                          DeSitterSign sign, bool include_vacuum_energy) {
  const double k2 = k * k;
  const double c = (k2 + g.m2) / bg.H2 + 12.0 * (bg.xi - 1.0 / 6.0);
  const double nu2 = 9.0 / 4.0 - 12.0 * bg.xi + (k2 + g.m2) / bg.H2;
  const double log_term = std::log(12.0 * bg.H2 / resolve_mu2(bg.mu, k, bg.H2));
  const auto b = desitter_braces(c, nu2, log_term, sign);

  CouplingVector r{0.0, 0.0, 0.0, Scaling::Dimensionful};
  r.m2 = -k2 * g.lambda / (16.0 * kPi2) * b.mass;
  r.lambda = -3.0 * k2 * g.lambda * g.lambda / (16.0 * kPi2 * bg.H2 * b.nu) * b.quartic;
  if (include_vacuum_energy) {
    r.U0 = -k2 / (16.0 * kPi2) * (-2.0 * bg.H2 / 3.0 + bg.H2 * c * b.psi_part);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Kernel-derived
// ---------------------------------------------------------------------------

CouplingVector beta_from_kernel(const CouplingVector& g, double k, const Background& bg,
                                double fd_step) {
  if (g.dimensionless()) throw std::invalid_argument("beta_from_kernel expects dimensionful couplings");
  if (!(fd_step >= 1e-8 && fd_step <= 1e-2)) {
    throw std::invalid_argument("fd_step must lie in [1e-8, 1e-2]");
  }
  const double k2 = k * k;
  const double M2 = k2 + g.m2;
  const QuadratureOptions quad{.rel_tol = 1e-13};

  double scale = std::max(std::abs(M2), k2);
  if (const auto* ds = std::get_if<DeSitter>(&bg)) scale = std::max(scale, ds->H2);
  const double dM2 = fd_step * scale;
  const double h = g.lambda != 0.0 ? dM2 / std::abs(g.lambda) : dM2;

  auto source = [&](double rho) {
    const double m = M2 + g.lambda * rho;
    try {
      return k2 * wick_square(m, bg, k, quad).value;
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " (at stencil point rho = " + show(rho) +
                        ", M2 = " + show(m) + ")");
    }
  };
  const double s0 = source(0.0);
  const double sp = source(h);
  const double sm = source(-h);
  return {s0, (sp - sm) / (2.0 * h), 3.0 * (sp - 2.0 * s0 + sm) / (h * h), Scaling::Dimensionful};
}

// ---------------------------------------------------------------------------
// BetaSystem
// ---------------------------------------------------------------------------

BetaSystem::BetaSystem(SystemSpec spec, double Lambda) : spec_(std::move(spec)), Lambda_(Lambda) {
  if (!(Lambda > 0.0) || !std::isfinite(Lambda)) {
    throw InvalidProblem("reference scale Lambda must be positive");
  }
  std::visit(overloaded{
                 [](const system::MinkowskiDimensionless& s) { validate(Background{MinkowskiVacuum{4, s.mu}}); },
                 [](const system::MinkowskiDimensionful& s) { validate(Background{MinkowskiVacuum{4, s.mu}}); },
                 [](const system::ThermalHighT&) {},
                 [](const system::ThermalExact& s) { validate(Background{s.background}); },
                 [](const system::DeSitterDimensionless& s) { validate(Background{s.background}); },
                 [](const system::DeSitterDimensionful& s) { validate(Background{s.background}); },
                 [](const system::Kernel& s) {
                   validate(s.background);
                   if (!(s.fd_step >= 1e-8 && s.fd_step <= 1e-2)) {
                     throw InvalidProblem("fd_step must lie in [1e-8, 1e-2]");
                   }
                 },
             },
             spec_);
}

double BetaSystem::k(double t) const { return Lambda_ * std::exp(t); }

CouplingVector BetaSystem::rate(double t, const CouplingVector& g) const {
  const double kk = k(t);
  CouplingVector in = g;
  in.scaling = scaling();
  return std::visit(
      overloaded{
          [&](const system::MinkowskiDimensionless& s) {
            return beta_minkowski_vacuum(in, t, s.mu, Lambda_);
          },
          [&](const system::MinkowskiDimensionful& s) {
            return beta_minkowski_vacuum_dimensionful(in, kk, s.mu);
          },
          [&](const system::ThermalHighT&) { return beta_thermal_highT(in); },
          [&](const system::ThermalExact& s) { return beta_thermal_exact(in, kk, s.background); },
          [&](const system::DeSitterDimensionless& s) {
            return beta_desitter(in, t, s.background,
                                 {s.sign, Lambda_, s.k2_over_H2, s.include_vacuum_energy});
          },
          [&](const system::DeSitterDimensionful& s) {
            return beta_desitter_dimensionful(in, kk, s.background, s.sign, s.include_vacuum_energy);
          },
          [&](const system::Kernel& s) { return beta_from_kernel(in, kk, s.background, s.fd_step); },
      },
      spec_);
}

namespace {

void check_desitter_nu(double nu2) {
  if (!(nu2 > 0.0)) {
    throw DomainError("de Sitter index nu not real and positive (nu^2 = " + show(nu2) + ")");
  }
  const double lo = 1.5 - std::sqrt(nu2);
  if (lo <= 0.0 && lo == std::floor(lo)) throw PoleError("psi(3/2 - nu) at a pole");
}

void check_positive_M2(double M2) {
  if (!(M2 > 0.0)) throw DomainError("k^2 + m^2 must be positive, got " + show(M2));
}

}  // namespace

void BetaSystem::check_domain(double t, const CouplingVector& g) const {
  for (double v : g.values()) {
    if (!std::isfinite(v)) throw DomainError("non-finite coupling");
  }
  const double kk = k(t);
  const double k2 = kk * kk;
  std::visit(overloaded{
                 [&](const system::MinkowskiDimensionless&) { require_positive_mass_ratio(1.0 + g.m2); },
                 [&](const system::MinkowskiDimensionful&) { check_positive_M2(k2 + g.m2); },
                 [&](const system::ThermalHighT&) { require_positive_mass_ratio(1.0 + g.m2); },
                 [&](const system::ThermalExact&) { check_positive_M2(k2 + g.m2); },
                 [&](const system::DeSitterDimensionless& s) {
                   const double k2_H2 = s.k2_over_H2.value_or(k2 / s.background.H2);
                   check_desitter_nu(9.0 / 4.0 - 12.0 * s.background.xi + k2_H2 + g.m2);
                 },
                 [&](const system::DeSitterDimensionful& s) {
                   check_desitter_nu(9.0 / 4.0 - 12.0 * s.background.xi +
                                     (k2 + g.m2) / s.background.H2);
                 },
                 [&](const system::Kernel& s) {
                   if (const auto* ds = std::get_if<DeSitter>(&s.background)) {
                     check_desitter_nu(9.0 / 4.0 - 12.0 * ds->xi + (k2 + g.m2) / ds->H2);
                   } else {
                     check_positive_M2(k2 + g.m2);
                   }
                 },
             },
             spec_);
}

bool BetaSystem::in_domain(double t, const CouplingVector& g) const {
  try {
    check_domain(t, g);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

std::array<bool, 3> BetaSystem::active() const {
  if (const auto* s = std::get_if<system::DeSitterDimensionless>(&spec_)) {
    return {s->include_vacuum_energy, true, true};
  }
  if (const auto* s = std::get_if<system::DeSitterDimensionful>(&spec_)) {
    return {s->include_vacuum_energy, true, true};
  }
  return {true, true, true};
}

std::size_t BetaSystem::active_dimension() const {
  std::size_t n = 0;
  for (bool a : active()) n += a ? 1 : 0;
  return n;
}

Scaling BetaSystem::scaling() const {
  return std::visit(overloaded{
                        [](const system::MinkowskiDimensionless&) { return Scaling::Minkowski; },
                        [](const system::ThermalHighT&) { return Scaling::ThermalHighT; },
                        [](const system::DeSitterDimensionless&) { return Scaling::DeSitter; },
                        [](const auto&) { return Scaling::Dimensionful; },
                    },
                    spec_);
}

bool BetaSystem::autonomous() const {
  return std::visit(overloaded{
                        [](const system::MinkowskiDimensionless& s) {
                          return std::holds_alternative<mu::TiedToK>(s.mu);
                        },
                        [](const system::ThermalHighT&) { return true; },
                        [](const system::DeSitterDimensionless& s) {
                          return s.k2_over_H2.has_value() &&
                                 !std::holds_alternative<mu::TiedToK>(s.background.mu);
                        },
                        [](const auto&) { return false; },
                    },
                    spec_);
}

std::string BetaSystem::name() const {
  return std::visit(overloaded{
                        [](const system::MinkowskiDimensionless& s) {
                          return "minkowski-vacuum (dimensionless, mu " + to_string(s.mu) + ")";
                        },
                        [](const system::MinkowskiDimensionful& s) {
                          return "minkowski-vacuum (dimensionful, mu " + to_string(s.mu) + ")";
                        },
                        [](const system::ThermalHighT&) { return std::string("thermal-high-t"); },
                        [](const system::ThermalExact&) { return std::string("thermal (exact)"); },
                        [](const system::DeSitterDimensionless& s) {
                          return "de-sitter (dimensionless, " + to_string(s.sign) + ")";
                        },
                        [](const system::DeSitterDimensionful& s) {
                          return "de-sitter (dimensionful, " + to_string(s.sign) + ")";
                        },
                        [](const system::Kernel& s) {
                          return "kernel-derived " + kind_name(s.background);
                        },
                    },
                    spec_);
}

}  // namespace lfrg

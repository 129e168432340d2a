#include "lfrg/tadpole.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lfrg/errors.hpp"

namespace lfrg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kPi = std::numbers::pi;

}  // namespace

void validate(const MuMode& mode) {
  if (const auto* f = std::get_if<mu::Fixed>(&mode)) {
    if (!(f->mu2 > 0.0) || !std::isfinite(f->mu2)) {
      throw DomainError("fixed renormalization scale requires mu2 > 0");
    }
  }
}

double resolve_mu2(const MuMode& mode, double k, double H2) {
  return std::visit(overloaded{
                        [](const mu::Fixed& f) {
                          if (!(f.mu2 > 0.0)) throw DomainError("mu2 must be positive");
                          return f.mu2;
                        },
                        [k](const mu::TiedToK&) {
                          if (!(k > 0.0)) throw DomainError("mu = k needs k > 0");
                          return k * k;
                        },
                        [H2](const mu::TiedToH&) {
                          if (!(H2 > 0.0)) {
                            throw DomainError("mu^2 = 12 H^2 needs a de Sitter background");
                          }
                          return 12.0 * H2;
                        },
                    },
                    mode);
}

std::string to_string(const MuMode& mode) {
  return std::visit(overloaded{
                        [](const mu::Fixed&) { return std::string("fixed"); },
                        [](const mu::TiedToK&) { return std::string("tied-to-k"); },
                        [](const mu::TiedToH&) { return std::string("tied-to-h"); },
                    },
                    mode);
}

void validate(const Background& bg) {
  std::visit(overloaded{
                 [](const MinkowskiVacuum& b) {
                   if (b.d < 2 || b.d % 2 != 0) {
                     throw DomainError("Minkowski vacuum kernel needs even d >= 2, got " +
                                       std::to_string(b.d));
                   }
                   if (std::holds_alternative<mu::TiedToH>(b.mu)) {
                     throw DomainError("mu tied to H is only meaningful on de Sitter");
                   }
                   validate(b.mu);
                 },
                 [](const Thermal& b) {
                   if (!(b.beta > 0.0)) throw DomainError("thermal background needs beta > 0");
                   if (std::holds_alternative<mu::TiedToH>(b.mu)) {
                     throw DomainError("mu tied to H is only meaningful on de Sitter");
                   }
                   validate(b.mu);
                 },
                 [](const DeSitter& b) {
                   if (!(b.H2 > 0.0) || !std::isfinite(b.H2)) {
                     throw DomainError("de Sitter background needs H2 > 0");
                   }
                   if (!std::isfinite(b.xi)) throw DomainError("xi must be finite");
                   validate(b.mu);
                 },
             },
             bg);
}

std::string kind_name(const Background& bg) {
  return std::visit(overloaded{
                        [](const MinkowskiVacuum&) { return std::string("minkowski-vacuum"); },
                        [](const Thermal&) { return std::string("thermal"); },
                        [](const DeSitter&) { return std::string("de-sitter"); },
                    },
                    bg);
}

TadpoleValue minkowski_vacuum_wick_square(double M2, double mu2, int d) {
  if (d != 2 && d != 4 && d != 6) {
    throw DomainError("Minkowski vacuum Wick square implemented for d = 2, 4, 6; got d = " +
                      std::to_string(d));
  }
  if (!(M2 > 0.0)) {
    throw DomainError("Minkowski vacuum Wick square needs M2 > 0, got M2 = " + show(M2));
  }
  if (!(mu2 > 0.0)) throw DomainError("renormalization scale mu2 must be positive");

  const int half = d / 2;
  double gamma_half = 1.0;  // Gamma(d/2) = (d/2 - 1)!
  for (int i = 2; i < half; ++i) gamma_half *= i;
  const double sign = (half % 2 == 0) ? 1.0 : -1.0;
  const double prefactor = sign * 2.0 / (gamma_half * std::pow(4.0 * kPi, half));
  const double value = prefactor * std::pow(M2, half - 1) * std::log(M2 / mu2);
  return {value, M2};
}

TadpoleValue thermal_wick_square(double M2, const Thermal& bg, double k,
                                 const QuadratureOptions& quad) {
  const double vacuum = minkowski_vacuum_wick_square(M2, resolve_mu2(bg.mu, k), 4).value;
  return {vacuum + bose_tadpole(M2, bg.beta, quad), M2};
}

double desitter_nu(double M2, double H2, double xi) {
  if (!(H2 > 0.0)) throw DomainError("de Sitter needs H2 > 0");
  const double nu2 = 9.0 / 4.0 - 12.0 * xi + M2 / H2;
  if (!(nu2 >= 0.0)) {
    throw DomainError("de Sitter index nu is imaginary (nu^2 = " + show(nu2) + ")");
  }
  return std::sqrt(nu2);
}

TadpoleValue desitter_wick_square(double M2, const DeSitter& bg, double k) {
  const double nu = desitter_nu(M2, bg.H2, bg.xi);
  const double log_term = std::log(12.0 * bg.H2 / resolve_mu2(bg.mu, k, bg.H2));
  const double bracket = M2 + 12.0 * (bg.xi - 1.0 / 6.0) * bg.H2;
  const double psi_sum = digamma(1.5 + nu) + digamma(1.5 - nu);
  const double value =
      -(1.0 / (16.0 * kPi * kPi)) * (-2.0 * bg.H2 / 3.0 + bracket * (psi_sum + log_term));
  if (!std::isfinite(value)) throw DomainError("de Sitter Wick square is not finite");
  return {value, M2};
}

TadpoleValue wick_square(double M2, const Background& bg, double k, const QuadratureOptions& quad) {
  return std::visit(overloaded{
                        [&](const MinkowskiVacuum& b) {
                          return minkowski_vacuum_wick_square(M2, resolve_mu2(b.mu, k), b.d);
                        },
                        [&](const Thermal& b) { return thermal_wick_square(M2, b, k, quad); },
                        [&](const DeSitter& b) { return desitter_wick_square(M2, b, k); },
                    },
                    bg);
}

}  // namespace lfrg

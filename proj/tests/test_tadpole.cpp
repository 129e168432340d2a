#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lfrg/errors.hpp"
#include "lfrg/tadpole.hpp"

using namespace lfrg;

namespace {
constexpr double pi = std::numbers::pi;
constexpr double pi2 = pi * pi;
}  // namespace

TEST_CASE("Minkowski vacuum Wick square in d = 2, 4, 6") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> mass(0.01, 50.0);
  for (int i = 0; i < 100; ++i) {
    const double M2 = mass(rng), mu2 = mass(rng);
    const double L = std::log(M2 / mu2);
    CHECK(minkowski_vacuum_wick_square(M2, mu2, 4).value ==
          doctest::Approx(M2 / (8 * pi2) * L).epsilon(1e-14));
    CHECK(minkowski_vacuum_wick_square(M2, mu2, 2).value == doctest::Approx(-L / (2 * pi)).epsilon(1e-14));
    CHECK(minkowski_vacuum_wick_square(M2, mu2, 6).value ==
          doctest::Approx(-M2 * M2 / (64 * pi2 * pi) * L).epsilon(1e-14));
  }
  CHECK(minkowski_vacuum_wick_square(3.0, 3.0, 4).value == 0.0);
}

TEST_CASE("Minkowski vacuum Wick square domain") {
  CHECK_THROWS_AS(minkowski_vacuum_wick_square(0.0, 1.0, 4), DomainError);
  CHECK_THROWS_AS(minkowski_vacuum_wick_square(-1.0, 1.0, 4), DomainError);
  CHECK_THROWS_AS(minkowski_vacuum_wick_square(1.0, 0.0, 4), DomainError);
  CHECK_THROWS_AS(minkowski_vacuum_wick_square(1.0, 1.0, 3), DomainError);
}

TEST_CASE("renormalization scale resolution") {
  CHECK(resolve_mu2(mu::Fixed{2.5}, 7.0) == 2.5);
  CHECK(resolve_mu2(mu::TiedToK{}, 3.0) == 9.0);
  CHECK(resolve_mu2(mu::TiedToH{}, 3.0, 0.5) == doctest::Approx(6.0));
  CHECK_THROWS_AS(resolve_mu2(mu::TiedToH{}, 3.0), DomainError);
  CHECK_THROWS_AS(validate(MuMode{mu::Fixed{0.0}}), DomainError);
  CHECK_THROWS_AS(validate(Background{Thermal{-1.0}}), DomainError);
  CHECK_THROWS_AS(validate(Background{DeSitter{0.0}}), DomainError);
}

TEST_CASE("thermal Wick square is vacuum plus Bose part") {
  const Thermal bg{0.7, mu::Fixed{1.3}};
  for (double M2 : {0.2, 1.0, 9.0}) {
    const double expect = M2 / (8 * pi2) * std::log(M2 / 1.3) + bose_tadpole(M2, 0.7);
    CHECK(thermal_wick_square(M2, bg, 2.0).value == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("cold thermal state approaches the vacuum") {
  // The Bose factor carries |p| rather than the regulated frequency, so the
  // excess is bounded by the massless value 1/(12 beta^2), not by exp(-beta M).
  const Thermal cold{1e3, mu::TiedToK{}};
  for (double M2 : {0.5, 1.0, 4.0}) {
    const double vac = minkowski_vacuum_wick_square(M2, 1.0, 4).value;
    const double excess = thermal_wick_square(M2, cold, 1.0).value - vac;
    CHECK(excess > 0.0);
    CHECK(excess <= 1.0 / 12e6);
  }
}

TEST_CASE("de Sitter Wick square reference values") {
  const DeSitter conformal{1.0, 1.0 / 6.0, mu::TiedToH{}};
  // M^2 = H^2, extended-precision reference
  CHECK(desitter_wick_square(1.0, conformal, 1.0).value ==
        doctest::Approx(0.0164981920191501666).epsilon(1e-12));
  // massless conformal field: only the -2H^2/3 term survives
  CHECK(desitter_wick_square(0.0, conformal, 1.0).value ==
        doctest::Approx(1.0 / (24 * pi2)).epsilon(1e-13));
  const DeSitter big{4.0, 1.0 / 6.0, mu::TiedToH{}};
  CHECK(desitter_wick_square(0.0, big, 1.0).value == doctest::Approx(4.0 / (24 * pi2)).epsilon(1e-13));
}

TEST_CASE("de Sitter scale dependence is a pure log shift") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 50; ++i) {
    const double H2 = u(rng), M2 = u(rng), mu2 = u(rng), xi = 0.03 * u(rng);
    const DeSitter a{H2, xi, mu::Fixed{mu2}};
    const DeSitter b{H2, xi, mu::TiedToH{}};
    const double shift = -(M2 + 12 * (xi - 1.0 / 6) * H2) / (16 * pi2) * std::log(12 * H2 / mu2);
    CHECK(desitter_wick_square(M2, a, 1.0).value ==
          doctest::Approx(desitter_wick_square(M2, b, 1.0).value + shift).epsilon(1e-11));
  }
}

TEST_CASE("de Sitter domain") {
  const DeSitter minimal{1.0, 0.0, mu::TiedToH{}};
  CHECK_THROWS_AS(desitter_wick_square(0.0, minimal, 1.0), PoleError);
  const DeSitter heavy_xi{1.0, 1.0, mu::TiedToH{}};
  CHECK_THROWS_AS(desitter_wick_square(0.0, heavy_xi, 1.0), DomainError);
  CHECK(desitter_nu(0.0, 1.0, 1.0 / 6.0) == doctest::Approx(0.5));
  CHECK(desitter_nu(2.0, 1.0, 0.0) == doctest::Approx(std::sqrt(4.25)));
}

TEST_CASE("wick_square dispatches on the background") {
  const double M2 = 1.7, k = 0.9;
  CHECK(wick_square(M2, MinkowskiVacuum{4, mu::TiedToK{}}, k).value ==
        minkowski_vacuum_wick_square(M2, k * k, 4).value);
  CHECK(wick_square(M2, MinkowskiVacuum{6, mu::Fixed{2.0}}, k).value ==
        minkowski_vacuum_wick_square(M2, 2.0, 6).value);
  const Thermal th{2.0, mu::TiedToK{}};
  CHECK(wick_square(M2, th, k).value == thermal_wick_square(M2, th, k).value);
  const DeSitter ds{0.5, 0.2, mu::TiedToH{}};
  CHECK(wick_square(M2, ds, k).value == desitter_wick_square(M2, ds, k).value);
  CHECK(wick_square(M2, ds, k).M2 == M2);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lfrg/errors.hpp"
#include "lfrg/fixed_points.hpp"
#include "lfrg/specfun.hpp"

using namespace lfrg;

namespace {

constexpr double pi2 = std::numbers::pi * std::numbers::pi;

const double kThermalLambda = 8.0 / 3.0 * pi2 * std::pow(0.6, 1.5);

std::vector<double> real_parts(const std::vector<std::complex<double>>& v) {
  std::vector<double> r;
  for (const auto& z : v) r.push_back(z.real());
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace

TEST_CASE("Newton on a circle meeting a line") {
  VectorField f{2, [](std::span<const double> x, std::span<double> out) {
                  out[0] = x[0] * x[0] + x[1] * x[1] - 1.0;
                  out[1] = x[0] - x[1];
                }};
  const auto r = newton_solve(f, {2.0, 0.5});
  CHECK(r.x[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(r.x[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(r.residual <= 1e-12);
}

TEST_CASE("Newton reports non-convergence with the last iterate") {
  VectorField f{1, [](std::span<const double> x, std::span<double> out) { out[0] = x[0] * x[0] + 1.0; }};
  NewtonOptions o;
  o.max_iter = 30;
  try {
    newton_solve(f, {0.3}, o);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& e) {
    CHECK(e.last_iterate.size() == 1);
    CHECK(e.residual >= 1.0);
  }
}

TEST_CASE("difference Jacobian of a polynomial map") {
  VectorField f{3, [](std::span<const double> x, std::span<double> out) {
                  out[0] = x[0] * x[1];
                  out[1] = x[1] * x[1] * x[2];
                  out[2] = std::sin(x[0]) + x[2];
                }};
  const std::vector<double> x{0.3, -1.2, 2.0};
  const auto J = fd_jacobian(f, x, 1e-6, 1e-8);
  Eigen::Matrix3d exact;
  exact << x[1], x[0], 0, 0, 2 * x[1] * x[2], x[1] * x[1], std::cos(x[0]), 0, 1;
  CHECK((J - exact).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("linearization of a linear map recovers its spectrum") {
  VectorField f{2, [](std::span<const double> x, std::span<double> out) {
                  out[0] = -3.0 * x[0] + x[1];
                  out[1] = 2.0 * x[1];
                }};
  const std::vector<double> x0{0.0, 0.0};
  const auto lin = linearize(f, x0);
  CHECK(lin.eigenvalues[0].real() == doctest::Approx(2.0));
  CHECK(lin.eigenvalues[1].real() == doctest::Approx(-3.0));
  CHECK(lin.exponents[0].real() == doctest::Approx(-2.0));
  CHECK(lin.classification.kind == StabilityClass::Mixed);
  CHECK(lin.classification.relevant == 1);
  CHECK(lin.classification.irrelevant == 1);
}

TEST_CASE("complex eigenvalues of a rotation-contraction") {
  VectorField f{2, [](std::span<const double> x, std::span<double> out) {
                  out[0] = -x[0] - 2.0 * x[1];
                  out[1] = 2.0 * x[0] - x[1];
                }};
  const std::vector<double> x0{0.0, 0.0};
  const auto lin = linearize(f, x0);
  CHECK(std::abs(std::abs(lin.eigenvalues[0].imag()) - 2.0) < 1e-8);
  CHECK(lin.classification.kind == StabilityClass::UVAttractive);
}

TEST_CASE("thermal high-T fixed point and its spectrum") {
  BetaSystem sys(system::ThermalHighT{});
  const auto r = find_fixed_point(sys, {0.05, -0.3, 10.0, Scaling::ThermalHighT});
  CHECK(std::abs(r.location.m2 + 0.4) <= 1e-10);
  CHECK(std::abs(r.location.U0 - zeta3() / (2 * pi2)) <= 1e-12);
  CHECK(std::abs(r.location.lambda - kThermalLambda) <= 1e-9 * kThermalLambda);
  const auto ev = real_parts(r.eigenvalues);
  CHECK(ev[0] == doctest::Approx(-2.0).epsilon(1e-7));
  CHECK(ev[1] == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(ev[2] == doctest::Approx(5.0 / 3.0).epsilon(1e-7));
  CHECK(r.classification.relevant == 2);
  CHECK(r.classification.irrelevant == 1);
  // 2x2 (m~2, lambda~) block: trace -1/3, determinant -10/3
  const Eigen::Matrix2d block = r.stability_matrix.bottomRightCorner<2, 2>();
  CHECK(block.trace() == doctest::Approx(-1.0 / 3.0).epsilon(1e-7));
  CHECK(block.determinant() == doctest::Approx(-10.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("random starts around the thermal fixed point land on it") {
  BetaSystem sys(system::ThermalHighT{});
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  for (int i = 0; i < 30; ++i) {
    const CouplingVector g{0.06 + jitter(rng), -0.4 + jitter(rng), kThermalLambda * (1 + jitter(rng))};
    const auto r = find_fixed_point(sys, g);
    CHECK(std::abs(r.location.lambda - kThermalLambda) <= 1e-9 * kThermalLambda);
  }
}

TEST_CASE("Gaussian fixed point of the mu = k vacuum flow") {
  BetaSystem sys(system::MinkowskiDimensionless{mu::TiedToK{}});
  const auto r = find_fixed_point(sys, {0.01, 0.02, 0.01});
  CHECK(std::abs(r.location.U0) < 1e-10);
  CHECK(std::abs(r.location.m2) < 1e-8);
  CHECK(std::abs(r.location.lambda) < 1e-6);
  const auto ev = real_parts(r.eigenvalues);
  CHECK(std::abs(ev[0] + 4.0) < 1e-8);
  CHECK(std::abs(ev[1] + 2.0) < 1e-8);
  CHECK(std::abs(ev[2]) < 1e-8);
  CHECK(r.classification.marginal == 1);
  CHECK(r.classification.relevant == 2);
}

TEST_CASE("scan over the vacuum flow finds only the Gaussian point") {
  BetaSystem sys(system::MinkowskiDimensionless{mu::TiedToK{}});
  GridSpec grid;
  grid.m2 = {-0.5, 2.0, 8};
  grid.lambda = {0.0, 50.0, 8};
  const auto res = scan_fixed_points(sys, grid);
  CHECK(res.starts == 64);
  REQUIRE(res.roots.size() == 1);
  CHECK(std::abs(res.roots[0].location.lambda) < 1e-6);
}

TEST_CASE("serial and parallel scans agree exactly") {
  BetaSystem sys(system::ThermalHighT{});
  GridSpec grid;
  grid.U0 = {0.0, 0.1, 2};
  grid.m2 = {-0.8, 1.0, 5};
  grid.lambda = {1.0, 40.0, 5};
  const auto a = scan_fixed_points(sys, grid, {}, Execution::Serial);
  const auto b = scan_fixed_points(sys, grid, {}, Execution::Parallel);
  CHECK(a.starts == b.starts);
  CHECK(a.failed == b.failed);
  CHECK(a.outside_domain == b.outside_domain);
  REQUIRE(a.roots.size() == b.roots.size());
  for (std::size_t i = 0; i < a.roots.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(a.roots[i].location[j] == b.roots[i].location[j]);
}

TEST_CASE("de Sitter fixed points of both sign conventions") {
  const DeSitter bg{1.0, 1.0 / 6.0, mu::TiedToH{}};
  BetaSystem printed(system::DeSitterDimensionless{bg, DeSitterSign::PaperTranscribed, 0.0});
  BetaSystem consistent(system::DeSitterDimensionless{bg, DeSitterSign::KernelConsistent, 0.0});
  const auto a = find_fixed_point(printed, {0.0, 0.45, 45.0});
  CHECK(a.location.m2 == doctest::Approx(0.476554287087399).epsilon(1e-9));
  CHECK(a.location.lambda == doctest::Approx(45.6942297104762).epsilon(1e-9));
  CHECK(a.active == std::array<bool, 3>{false, true, true});
  CHECK(a.eigenvalues.size() == 2);
  const auto b = find_fixed_point(consistent, {0.0, -0.08, -57.0});
  CHECK(b.location.m2 == doctest::Approx(-0.0809984726859660).epsilon(1e-9));
  CHECK(b.location.lambda == doctest::Approx(-57.915233472997615).epsilon(1e-9));
}

TEST_CASE("stability analysis insists on an actual fixed point") {
  BetaSystem sys(system::ThermalHighT{});
  CHECK_THROWS_AS(stability_analysis(sys, {0.06, -0.4, 12.0}), InvalidProblem);
  const auto ok = stability_analysis(sys, {zeta3() / (2 * pi2), -0.4, kThermalLambda});
  CHECK(ok.eigenvalues.size() == 3);
}

TEST_CASE("starts outside the domain are counted, not fatal") {
  BetaSystem sys(system::ThermalHighT{});
  GridSpec grid;
  grid.m2 = {-3.0, -1.5, 3};
  grid.lambda = {1.0, 2.0, 2};
  const auto res = scan_fixed_points(sys, grid);
  CHECK(res.outside_domain == 6);
  CHECK(res.roots.empty());
}

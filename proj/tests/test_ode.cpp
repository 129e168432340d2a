#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lfrg/errors.hpp"
#include "lfrg/ode.hpp"

using namespace lfrg;

namespace {

constexpr double pi2 = std::numbers::pi * std::numbers::pi;

OdeSystem decay() {
  return {1, [](double, std::span<const double> y, std::span<double> d) { d[0] = -y[0]; }, {}};
}

OdeSystem oscillator() {
  return {2,
          [](double, std::span<const double> y, std::span<double> d) {
            d[0] = y[1];
            d[1] = -y[0];
          },
          {}};
}

// lambda(t) = lambda0 / (1 - 3 lambda0 t / 8 pi^2)
double quartic_closed_form(double lam0, double t) { return lam0 / (1.0 - 3.0 * lam0 * t / (8.0 * pi2)); }

OdeSystem quartic_only() {
  return {1,
          [](double, std::span<const double> y, std::span<double> d) {
            d[0] = 3.0 * y[0] * y[0] / (8.0 * pi2);
          },
          {}};
}

}  // namespace

TEST_CASE("exponential decay forward and backward") {
  const std::vector<double> y0{1.0};
  const auto fwd = integrate_ode(decay(), 0.0, 3.0, y0);
  CHECK(reached_end(fwd.termination));
  CHECK(fwd.t.front() == 0.0);
  CHECK(fwd.t.back() == 3.0);
  CHECK(fwd.y.back()[0] == doctest::Approx(std::exp(-3.0)).epsilon(1e-9));
  const auto bwd = integrate_ode(decay(), 0.0, -2.0, y0);
  CHECK(bwd.t.back() == -2.0);
  CHECK(bwd.y.back()[0] == doctest::Approx(std::exp(2.0)).epsilon(1e-9));
  CHECK(fwd.stats.accepted + 1 == static_cast<long>(fwd.t.size()));
}

TEST_CASE("oscillator keeps its phase over several periods") {
  const std::vector<double> y0{1.0, 0.0};
  const double T = 6 * std::numbers::pi;
  const auto sol = integrate_ode(oscillator(), 0.0, T, y0);
  CHECK(std::abs(sol.y.back()[0] - 1.0) < 1e-8);
  CHECK(std::abs(sol.y.back()[1]) < 1e-8);
}

TEST_CASE("steps land exactly on checkpoints") {
  IntegratorOptions opts;
  opts.checkpoints = {0.3, 1.7, 2.25, 5.0, -1.0};
  const std::vector<double> y0{1.0};
  const auto sol = integrate_ode(decay(), 0.0, 3.0, y0, opts);
  for (double c : {0.3, 1.7, 2.25}) {
    bool hit = false;
    for (std::size_t i = 0; i < sol.t.size(); ++i)
      if (sol.t[i] == c) {
        hit = true;
        CHECK(sol.y[i][0] == doctest::Approx(std::exp(-c)).epsilon(1e-9));
      }
    CHECK(hit);
  }
}

TEST_CASE("quartic closed form to 1e-8 over t in [0, 5]") {
  const std::vector<double> y0{0.1};
  const auto sol = integrate_ode(quartic_only(), 0.0, 5.0, y0);
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    const double exact = quartic_closed_form(0.1, sol.t[i]);
    CHECK(std::abs(sol.y[i][0] - exact) <= 1e-8 * exact);
  }
}

TEST_CASE("the flow front end agrees with the closed form") {
  FlowProblem p{BetaSystem(system::MinkowskiDimensionless{mu::TiedToK{}}), {0.0, 0.0, 0.1}, 0.0, 5.0, {}};
  const auto traj = integrate(p);
  REQUIRE(reached_end(traj.termination));
  CHECK(traj.samples.size() == static_cast<std::size_t>(traj.stats.accepted + 1));
  for (const auto& s : traj.samples) {
    CHECK(s.k == doctest::Approx(std::exp(s.t)).epsilon(1e-15));
    CHECK(s.couplings.scaling == Scaling::Minkowski);
  }
  // m~2 is driven away from 0 by lambda, so only the first step is expected
  // to follow the decoupled law closely
  CHECK(traj.samples[1].couplings.lambda ==
        doctest::Approx(quartic_closed_form(0.1, traj.samples[1].t)).epsilon(1e-6));
}

TEST_CASE("observed order under tolerance refinement") {
  // Over [0, 5] the quartic law is so smooth that every tolerance lands at
  // roundoff; the window up to t = 200 (pole at 263) keeps the error measurable.
  const std::vector<double> y0{0.1};
  const double T = 200.0;
  const double exact = quartic_closed_form(0.1, T);
  std::vector<double> log_n, log_e;
  for (double tol : {1e-10, 1e-11, 1e-12, 1e-13}) {
    IntegratorOptions o;
    o.rel_tol = tol;
    o.abs_tol = 1e-300;
    const auto sol = integrate_ode(quartic_only(), 0.0, T, y0, o);
    log_n.push_back(std::log(static_cast<double>(sol.stats.accepted)));
    log_e.push_back(std::log(std::abs(sol.y.back()[0] - exact) / exact));
  }
  // least-squares slope of log(error) against log(steps)
  const double n = static_cast<double>(log_n.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    sx += log_n[i];
    sy += log_e[i];
    sxx += log_n[i] * log_n[i];
    sxy += log_n[i] * log_e[i];
  }
  const double order = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  CAPTURE(order);
  CHECK(order >= 4.5);
}

TEST_CASE("domain exits are localized by bisection") {
  OdeSystem s{1, [](double, std::span<const double>, std::span<double> d) { d[0] = -1.0; },
              [](double, std::span<const double> y) {
                if (y[0] <= 0.5) throw DomainError("below one half");
              }};
  const std::vector<double> y0{1.0};
  const auto sol = integrate_ode(s, 0.0, 2.0, y0);
  REQUIRE(std::holds_alternative<termination::DomainStop>(sol.termination));
  const auto& stop = std::get<termination::DomainStop>(sol.termination);
  CHECK(stop.t <= 0.5);
  CHECK(stop.t > 0.5 - 1e-9);
  CHECK(sol.y.back()[0] > 0.5);
  CHECK(stop.reason.find("below one half") != std::string::npos);
}

TEST_CASE("finite-time blowup becomes a pole stop") {
  OdeSystem s{1, [](double, std::span<const double> y, std::span<double> d) { d[0] = y[0] * y[0]; }, {}};
  const std::vector<double> y0{1.0};
  const auto sol = integrate_ode(s, 0.0, 2.0, y0);
  REQUIRE(std::holds_alternative<termination::PoleStop>(sol.termination));
  const auto& pole = std::get<termination::PoleStop>(sol.termination);
  CHECK(pole.t < 1.0);
  CHECK(pole.t > 0.999);
  CHECK(pole.component == 0);
  for (const auto& y : sol.y) CHECK(std::abs(y[0]) <= 1e12);
}

TEST_CASE("Landau pole of the quartic law") {
  const std::vector<double> y0{1.0};
  const auto sol = integrate_ode(quartic_only(), 0.0, 40.0, y0);
  REQUIRE(std::holds_alternative<termination::PoleStop>(sol.termination));
  const double t_pole = 8 * pi2 / 3;
  CHECK(std::get<termination::PoleStop>(sol.termination).t < t_pole);
  CHECK(std::get<termination::PoleStop>(sol.termination).t > t_pole - 1e-6);
}

TEST_CASE("step budget") {
  IntegratorOptions o;
  o.max_steps = 3;
  const std::vector<double> y0{1.0, 0.0};
  const auto sol = integrate_ode(oscillator(), 0.0, 100.0, y0, o);
  REQUIRE(std::holds_alternative<termination::StepBudget>(sol.termination));
  CHECK(sol.stats.accepted == 3);
  CHECK(kind_name(sol.termination) == "step-budget");
}

TEST_CASE("malformed problems") {
  const std::vector<double> y0{1.0};
  CHECK_THROWS_AS(integrate_ode(decay(), 1.0, 1.0, y0), InvalidProblem);
  const std::vector<double> wrong{1.0, 2.0};
  CHECK_THROWS_AS(integrate_ode(decay(), 0.0, 1.0, wrong), InvalidProblem);
  IntegratorOptions bad;
  bad.rel_tol = -1.0;
  CHECK_THROWS_AS(integrate_ode(decay(), 0.0, 1.0, y0, bad), InvalidProblem);
}

TEST_CASE("start outside the domain stops immediately") {
  FlowProblem p{BetaSystem(system::ThermalHighT{}), {0.0, -2.0, 1.0}, 0.0, 1.0, {}};
  const auto traj = integrate(p);
  CHECK(std::holds_alternative<termination::DomainStop>(traj.termination));
  CHECK(traj.samples.empty());
}

TEST_CASE("trajectories are reproducible") {
  FlowProblem p{BetaSystem(system::ThermalHighT{}), {0.05, -0.3, 10.0}, 0.0, 3.0, {}};
  const auto a = integrate(p);
  const auto b = integrate(p);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].t == b.samples[i].t);
    CHECK(a.samples[i].couplings.lambda == b.samples[i].couplings.lambda);
  }
}

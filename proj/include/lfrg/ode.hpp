#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lfrg/couplings.hpp"
#include "lfrg/flow_systems.hpp"

namespace lfrg {

/// dy/dt = rhs(t, y). rhs and check_domain signal leaving the domain by
/// throwing DomainError; check_domain is optional.
struct OdeSystem {
  std::size_t dimension = 0;
  std::function<void(double t, std::span<const double> y, std::span<double> dydt)> rhs;
  std::function<void(double t, std::span<const double> y)> check_domain;
};

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  long max_steps = 1'000'000;
  double min_step = 1e-12;      // bisection floor in t after domain failures
  double blowup = 1e12;         // |y_i| above this is reported as a pole
  double initial_step = 0.0;    // 0: automatic
  std::vector<double> checkpoints;  // t values that steps must land on exactly
};

namespace termination {
struct ReachedEnd {};
struct DomainStop {
  double t;
  std::string reason;
};
struct PoleStop {
  double t;
  std::size_t component;
  double value;
};
struct StepBudget {
  double t;
};
}  // namespace termination

using Termination = std::variant<termination::ReachedEnd, termination::DomainStop,
                                 termination::PoleStop, termination::StepBudget>;

std::string describe(const Termination& term);
std::string kind_name(const Termination& term);
inline bool reached_end(const Termination& term) {
  return std::holds_alternative<termination::ReachedEnd>(term);
}

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long domain_rejections = 0;
  long rhs_evaluations = 0;
};

/// Samples at t0 and after every accepted step.
struct OdeSolution {
  std::vector<double> t;
  std::vector<std::vector<double>> y;
  Termination termination = termination::ReachedEnd{};
  IntegratorStats stats;
};

/// Dormand-Prince 5(4) with a PI step-size controller. Integrates forward or
/// backward in t. Throws InvalidProblem for malformed input; everything else is
/// reported through the termination reason.
OdeSolution integrate_ode(const OdeSystem& system, double t0, double t_end,
                          std::span<const double> y0, const IntegratorOptions& opts = {});

// ---------------------------------------------------------------------------
// Coupling flows in renormalization time t = log(k/Lambda)
// ---------------------------------------------------------------------------

struct FlowProblem {
  BetaSystem system;
  CouplingVector initial;
  double t0 = 0.0;
  double t_end = 0.0;
  IntegratorOptions options;
};

struct FlowSample {
  double t;
  double k;
  CouplingVector couplings;
};

struct FlowTrajectory {
  std::vector<FlowSample> samples;
  Termination termination = termination::ReachedEnd{};
  IntegratorStats stats;
};

FlowTrajectory integrate(const FlowProblem& problem);

}  // namespace lfrg

#include "lfrg/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lfrg/errors.hpp"

namespace lfrg {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// b - b_hat
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// PI controller (Gustafsson), exponents for a 5th-order error estimate.
constexpr double kSafety = 0.9;
constexpr double kAlpha = 0.7 / 5.0;
constexpr double kBeta = 0.4 / 5.0;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

using Vec = std::vector<double>;

class Stepper {
 public:
  Stepper(const OdeSystem& sys, IntegratorStats& stats)
      : sys_(sys), stats_(stats), n_(sys.dimension), tmp_(n_), k2_(n_), k3_(n_), k4_(n_), k5_(n_),
        k6_(n_) {}

  void eval(double t, const Vec& y, Vec& out) {
    ++stats_.rhs_evaluations;
    sys_.rhs(t, y, out);
    for (double v : out) {
      if (!std::isfinite(v)) throw DomainError("right-hand side is not finite");
    }
  }

  // One trial step; fills y_new, k7 (= f(t+h, y_new)) and returns the scaled error norm.
  double step(double t, double h, const Vec& y, const Vec& k1, Vec& y_new, Vec& k7,
              double rtol, double atol) {
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * a21 * k1[i];
    eval(t + c2 * h, tmp_, k2_);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * (a31 * k1[i] + a32 * k2_[i]);
    eval(t + c3 * h, tmp_, k3_);
    for (std::size_t i = 0; i < n_; ++i)
      tmp_[i] = y[i] + h * (a41 * k1[i] + a42 * k2_[i] + a43 * k3_[i]);
    eval(t + c4 * h, tmp_, k4_);
    for (std::size_t i = 0; i < n_; ++i)
      tmp_[i] = y[i] + h * (a51 * k1[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
    eval(t + c5 * h, tmp_, k5_);
    for (std::size_t i = 0; i < n_; ++i)
      tmp_[i] =
          y[i] + h * (a61 * k1[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
    eval(t + h, tmp_, k6_);
    for (std::size_t i = 0; i < n_; ++i)
      y_new[i] =
          y[i] + h * (b1 * k1[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i]);
    if (sys_.check_domain) sys_.check_domain(t + h, y_new);
    eval(t + h, y_new, k7);

    double sum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double err = h * (e1 * k1[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                              e6 * k6_[i] + e7 * k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      sum += (err / sc) * (err / sc);
    }
    return std::sqrt(sum / static_cast<double>(n_));
  }

 private:
  const OdeSystem& sys_;
  IntegratorStats& stats_;
  std::size_t n_;
  Vec tmp_, k2_, k3_, k4_, k5_, k6_;
};

double scaled_rms(const Vec& v, const Vec& y, double rtol, double atol) {
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double sc = atol + rtol * std::abs(y[i]);
    sum += (v[i] / sc) * (v[i] / sc);
  }
  return std::sqrt(sum / static_cast<double>(v.size()));
}

// Starting step size after Hairer, Norsett & Wanner.
double initial_step(Stepper& stepper, double t0, double dir, double span, const Vec& y0,
                    const Vec& f0, const IntegratorOptions& opts) {
  const double d0 = scaled_rms(y0, y0, opts.rel_tol, opts.abs_tol);
  const double d1 = scaled_rms(f0, y0, opts.rel_tol, opts.abs_tol);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  Vec y1(y0.size()), f1(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i) y1[i] = y0[i] + dir * h0 * f0[i];
  try {
    stepper.eval(t0 + dir * h0, y1, f1);
  } catch (const DomainError&) {
    return h0;
  }
  Vec diff(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i) diff[i] = f1[i] - f0[i];
  const double d2 = scaled_rms(diff, y0, opts.rel_tol, opts.abs_tol) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, span});
}

void validate_problem(const OdeSystem& sys, double t0, double t_end, std::span<const double> y0,
                      const IntegratorOptions& opts) {
  if (!sys.rhs) throw InvalidProblem("ODE system has no right-hand side");
  if (sys.dimension == 0 || y0.size() != sys.dimension) {
    throw InvalidProblem("initial state size does not match the system dimension");
  }
  if (!std::isfinite(t0) || !std::isfinite(t_end) || t0 == t_end) {
    throw InvalidProblem("integration interval must be finite with t0 != t_end");
  }
  if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0)) {
    throw InvalidProblem("tolerances must be positive");
  }
  if (opts.max_steps <= 0) throw InvalidProblem("max_steps must be positive");
  if (!(opts.min_step > 0.0)) throw InvalidProblem("min_step must be positive");
  for (double v : y0) {
    if (!std::isfinite(v)) throw InvalidProblem("initial state is not finite");
  }
}

}  // namespace

std::string kind_name(const Termination& term) {
  switch (term.index()) {
    case 0: return "reached-end";
    case 1: return "domain-stop";
    case 2: return "pole-stop";
    default: return "step-budget";
  }
}

std::string describe(const Termination& term) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* d = std::get_if<termination::DomainStop>(&term)) {
    os << "domain-stop at t = " << d->t << ": " << d->reason;
  } else if (const auto* p = std::get_if<termination::PoleStop>(&term)) {
    os << "pole-stop at t = " << p->t << ": component " << p->component << " reached " << p->value;
  } else if (const auto* s = std::get_if<termination::StepBudget>(&term)) {
    os << "step-budget exhausted at t = " << s->t;
  } else {
    os << "reached-end";
  }
  return os.str();
}

OdeSolution integrate_ode(const OdeSystem& system, double t0, double t_end,
                          std::span<const double> y0_in, const IntegratorOptions& opts) {
  validate_problem(system, t0, t_end, y0_in, opts);

  OdeSolution sol;
  const std::size_t n = system.dimension;
  const double dir = t_end > t0 ? 1.0 : -1.0;
  const double span = std::abs(t_end - t0);

  std::vector<double> stops;
  for (double c : opts.checkpoints) {
    if (dir * (c - t0) > 0.0 && dir * (t_end - c) > 0.0) stops.push_back(c);
  }
  std::sort(stops.begin(), stops.end(), [dir](double a, double b) { return dir * a < dir * b; });
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  stops.push_back(t_end);
  std::size_t next_stop = 0;

  Vec y(y0_in.begin(), y0_in.end());
  Vec k1(n), y_new(n), k7(n);
  Stepper stepper(system, sol.stats);

  try {
    if (system.check_domain) system.check_domain(t0, y);
    stepper.eval(t0, y, k1);
  } catch (const DomainError& e) {
    sol.termination = termination::DomainStop{t0, e.what()};
    return sol;
  }
  sol.t.push_back(t0);
  sol.y.push_back(y);

  double t = t0;
  double h = opts.initial_step > 0.0 ? std::min(opts.initial_step, span)
                                     : initial_step(stepper, t0, dir, span, y, k1, opts);
  double err_prev = 1e-4;

  while (true) {
    if (sol.stats.accepted >= opts.max_steps) {
      sol.termination = termination::StepBudget{t};
      return sol;
    }
    const double target = stops[next_stop];
    const double remaining = std::abs(target - t);
    const bool landing = h >= remaining;
    const double h_try = landing ? remaining : h;

    double err = 0.0;
    try {
      err = stepper.step(t, dir * h_try, y, k1, y_new, k7, opts.rel_tol, opts.abs_tol);
    } catch (const DomainError& e) {
      ++sol.stats.domain_rejections;
      h = 0.5 * h_try;
      if (h < opts.min_step) {
        sol.termination = termination::DomainStop{t, e.what()};
        return sol;
      }
      continue;
    }

    if (err <= 1.0) {
      t = landing ? target : t + dir * h_try;
      y.swap(y_new);
      k1.swap(k7);
      ++sol.stats.accepted;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(y[i]) > opts.blowup) {
          sol.termination = termination::PoleStop{t, i, y[i]};
          return sol;
        }
      }
      sol.t.push_back(t);
      sol.y.push_back(y);
      if (landing && ++next_stop == stops.size()) {
        sol.termination = termination::ReachedEnd{};
        return sol;
      }
      double factor = err == 0.0 ? kMaxFactor
                                 : kSafety * std::pow(err, -kAlpha) * std::pow(err_prev, kBeta);
      factor = std::clamp(factor, kMinFactor, kMaxFactor);
      const double suggested = h_try * factor;
      // A step shortened to land on a checkpoint should not throttle the next one.
      h = landing ? std::max(suggested, h) : suggested;
      err_prev = std::max(err, 1e-4);
    } else {
      ++sol.stats.rejected;
      h = h_try * std::max(kMinFactor, kSafety * std::pow(err, -0.2));
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        sol.termination = termination::DomainStop{t, "step size underflow"};
        return sol;
      }
    }
  }
}

FlowTrajectory integrate(const FlowProblem& problem) {
  const auto& sys = problem.system;
  const Scaling scaling = sys.scaling();
  const OdeSystem ode{
      3,
      [&sys, scaling](double t, std::span<const double> y, std::span<double> dy) {
        const auto r = sys.rate(t, CouplingVector::from({y[0], y[1], y[2]}, scaling));
        dy[0] = r.U0;
        dy[1] = r.m2;
        dy[2] = r.lambda;
      },
      [&sys, scaling](double t, std::span<const double> y) {
        sys.check_domain(t, CouplingVector::from({y[0], y[1], y[2]}, scaling));
      },
  };
  const auto y0 = problem.initial.values();
  const auto sol = integrate_ode(ode, problem.t0, problem.t_end, y0, problem.options);

  FlowTrajectory traj;
  traj.termination = sol.termination;
  traj.stats = sol.stats;
  traj.samples.reserve(sol.t.size());
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    traj.samples.push_back(
        {sol.t[i], sys.k(sol.t[i]),
         CouplingVector::from({sol.y[i][0], sol.y[i][1], sol.y[i][2]}, scaling)});
  }
  return traj;
}

}  // namespace lfrg

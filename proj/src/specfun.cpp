#include "lfrg/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "lfrg/errors.hpp"

namespace lfrg {

PolyOrder::PolyOrder(int n) : n_(n) {
  if (n < 0 || n > 2) {
    throw std::invalid_argument("polygamma order must be 0, 1 or 2, got " + std::to_string(n));
  }
}

namespace {

// Below this the argument is shifted upward before the asymptotic series is used.
constexpr double kAsymptoticThreshold = 10.0;
constexpr double kMostNegativeArgument = -1e6;

// B_2, B_4, ..., B_16
constexpr std::array<double, 8> kBernoulli = {
    1.0 / 6.0,       -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0,      -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0,
};

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double asymptotic_polygamma(int n, double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  if (n == 0) {
    double series = 0.0;
    double p = inv2;
    for (std::size_t k = 0; k < kBernoulli.size(); ++k) {
      series += kBernoulli[k] / (2.0 * static_cast<double>(k + 1)) * p;
      p *= inv2;
    }
    return std::log(x) - 0.5 * inv - series;
  }
  // (-1)^{n+1} [ (n-1)!/x^n + n!/(2 x^{n+1}) + sum_k B_2k (2k+n-1)!/((2k)! x^{2k+n}) ]
  const double xn = std::pow(x, n);
  double sum = factorial(n - 1) / xn + factorial(n) / (2.0 * xn * x);
  double p = inv2 / xn;
  for (std::size_t i = 0; i < kBernoulli.size(); ++i) {
    const int two_k = 2 * static_cast<int>(i + 1);
    double ratio = 1.0;  // (2k+n-1)!/(2k)!
    for (int j = two_k + 1; j <= two_k + n - 1; ++j) ratio *= j;
    sum += kBernoulli[i] * ratio * p;
    p *= inv2;
  }
  return (n % 2 == 1) ? sum : -sum;
}

}  // namespace

double polygamma(PolyOrder order, double x) {
  const int n = order.value();
  if (!std::isfinite(x)) throw DomainError("polygamma: non-finite argument");
  if (x <= 0.0 && x == std::floor(x)) {
    throw PoleError("polygamma: pole at non-positive integer x = " + show(x));
  }
  if (x < kMostNegativeArgument) throw DomainError("polygamma: argument below recurrence reach");

  // psi^(n)(x) = psi^(n)(x+1) - (-1)^n n! / x^{n+1}
  const double sign_nfact = ((n % 2 == 0) ? 1.0 : -1.0) * factorial(n);
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift -= sign_nfact / std::pow(x, n + 1);
    x += 1.0;
  }
  return shift + asymptotic_polygamma(n, x);
}

// ---------------------------------------------------------------------------
// Gauss-Kronrod 7/15
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
// Gauss weights at the odd Kronrod nodes 1, 3, 5, 7.
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[i];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[i] * s;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * s;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace

QuadratureResult integrate_gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                                         const QuadratureOptions& opts) {
  if (b < a) {
    auto r = integrate_gauss_kronrod_with_breaks(f, {b, a}, opts);
    r.value = -r.value;
    return r;
  }
  return integrate_gauss_kronrod_with_breaks(f, {a, b}, opts);
}

QuadratureResult integrate_gauss_kronrod_with_breaks(const std::function<double(double)>& f,
                                                     std::vector<double> breaks,
                                                     const QuadratureOptions& opts) {
  if (breaks.size() < 2) throw InvalidProblem("quadrature needs at least one interval");
  std::sort(breaks.begin(), breaks.end());
  std::priority_queue<Panel> panels;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] <= breaks[i]) continue;
    const Panel p = gk15(f, breaks[i], breaks[i + 1]);
    total += p.value;
    total_err += p.error;
    panels.push(p);
  }
  while (total_err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    if (static_cast<int>(panels.size()) >= opts.max_panels) {
      throw ConvergenceError("adaptive quadrature exceeded " + std::to_string(opts.max_panels) +
                             " panels (error estimate " + show(total_err) + ")");
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = gk15(f, worst.a, mid);
    const Panel right = gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }

  QuadratureResult result;
  result.panels = static_cast<int>(panels.size());
  // Re-sum from scratch to drop the running-update drift.
  while (!panels.empty()) {
    result.value += panels.top().value;
    result.error += panels.top().error;
    panels.pop();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Bose-Einstein tadpole
// ---------------------------------------------------------------------------

namespace {

constexpr double kBoseUpper = 50.0;  // e^{-50} < 2e-22

void check_thermal_args(double M2, double beta) {
  if (!(beta > 0.0)) throw DomainError("bose_tadpole: inverse temperature must be positive");
  if (!(M2 >= 0.0) || !std::isfinite(M2)) {
    throw DomainError("bose_tadpole: mass squared must be finite and non-negative");
  }
}

// Panel edges that resolve the u ~ sqrt(a) structure of the integrands.
std::vector<double> bose_breaks(double a) {
  std::vector<double> breaks{0.0};
  if (a > 0.0) {
    for (double s = 0.5 * std::sqrt(a); s < 1.0; s *= 4.0) breaks.push_back(s);
  }
  for (double s : {1.0, 5.0, 15.0}) breaks.push_back(s);
  breaks.push_back(kBoseUpper);
  return breaks;
}

double bose_factor_times_u(double u) {  // u / (e^u - 1), finite at u = 0
  return u == 0.0 ? 1.0 : u / std::expm1(u);
}

}  // namespace

double bose_tadpole(double M2, double beta, const QuadratureOptions& opts) {
  check_thermal_args(M2, beta);
  if (std::isinf(beta)) return 0.0;
  const double a = beta * beta * M2;
  // u^2 / sqrt(u^2 + a) / (e^u - 1) written as u / sqrt(u^2 + a) * u / (e^u - 1)
  auto integrand = [a](double u) {
    const double r = std::sqrt(u * u + a);
    return (r == 0.0 ? 1.0 : u / r) * bose_factor_times_u(u);
  };
  const auto q = integrate_gauss_kronrod_with_breaks(integrand, bose_breaks(a), opts);
  return q.value / (2.0 * std::numbers::pi * std::numbers::pi * beta * beta);
}

double bose_tadpole_mass_derivative(int order, double M2, double beta,
                                    const QuadratureOptions& opts) {
  check_thermal_args(M2, beta);
  if (order != 1 && order != 2) throw std::invalid_argument("mass derivative order must be 1 or 2");
  if (!(M2 > 0.0)) throw DomainError("bose_tadpole_mass_derivative: requires M2 > 0");
  if (std::isinf(beta)) return 0.0;
  const double a = beta * beta * M2;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  if (order == 1) {
    auto integrand = [a](double u) {
      const double r2 = u * u + a;
      return u / (r2 * std::sqrt(r2)) * bose_factor_times_u(u);
    };
    return -integrate_gauss_kronrod_with_breaks(integrand, bose_breaks(a), opts).value / (4.0 * pi2);
  }
  auto integrand = [a](double u) {
    const double r2 = u * u + a;
    return u / (r2 * r2 * std::sqrt(r2)) * bose_factor_times_u(u);
  };
  return 3.0 * beta * beta *
         integrate_gauss_kronrod_with_breaks(integrand, bose_breaks(a), opts).value / (8.0 * pi2);
}

}  // namespace lfrg

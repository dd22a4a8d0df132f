#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "isap/error.hpp"

namespace isap::bounds {

inline double g(double alpha) { return std::log1p(std::exp(-2.0 * alpha)); }

namespace detail {

// Root of an increasing function on [lo, hi] by bisection, stopping when the
// bracket no longer shrinks.
inline double bisect_increasing(const std::function<double(double)>& f, double lo, double hi) {
  if (!(f(lo) <= 0.0 && f(hi) >= 0.0)) throw NumericalDiagnostic("bisection: root not bracketed");
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

}  // namespace detail

/// Solution of alpha + g(alpha)/5 = log mu.
inline double alpha_star(double mu_hat) {
  if (!(mu_hat > 1.0)) throw PreconditionError("alpha_star: mu_hat must exceed 1");
  const double target = std::log(mu_hat);
  auto f = [&](double a) { return a + g(a) / 5.0 - target; };
  double lo = target - 1.0;
  for (int k = 0; f(lo) > 0.0; ++k) {
    if (k > 200) throw NumericalDiagnostic("alpha_star: bracketing failure");
    lo -= 2.0 * (target - lo);
  }
  return detail::bisect_increasing(f, lo, target);
}

/// (1-q)(1 - log(1-q)), decreasing on [0, 1).
inline double q_constraint(double q) { return (1.0 - q) * (1.0 - std::log1p(-q)); }

/// Smallest q >= 5/6 with (1-q)(1 - log(1-q)) <= g(alpha*)/30.
inline double q_choice(double mu_hat) {
  const double rhs = g(alpha_star(mu_hat)) / 30.0;
  if (!(rhs > 0.0)) throw NumericalDiagnostic("q_choice: infeasible, g(alpha*) vanishes");
  constexpr double q_min = 5.0 / 6.0;
  if (q_constraint(q_min) <= rhs) return q_min;
  double hi = q_min;
  while (q_constraint(hi) > rhs) hi = 0.5 * (hi + 1.0);
  // Bisect on the decreasing constraint for the smallest feasible q.
  double lo = q_min;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (q_constraint(mid) > rhs ? lo : hi) = mid;
  }
  return hi;
}

inline double b1(double alpha, double lambda, double q) { return alpha + (1.0 - q) * lambda; }

inline double b2(double alpha, double q) {
  if (!(q > 0.0 && q < 1.0)) throw PreconditionError("b2: q must be in (0,1)");
  return alpha + (3.0 * q - 2.0) / 2.0 * g(alpha) - q_constraint(q);
}

inline double lambda_0(double q, double alpha) { return std::log(q / 2.0) - 2.0 * alpha; }

inline double q_of_c(double c) {
  if (!(c > 0.0 && c < 1.0)) throw PreconditionError("q_of_c: c must be in (0,1)");
  return c * std::exp(std::log1p(-c) / c - 1.0);
}

/// The objective under the supremum defining lambda_sf when alpha >= log mu.
inline double lambda_sf_objective(double c, double alpha, double log_mu) {
  return std::min((log_mu - alpha) / c, -2.0 * alpha + std::log(c) + std::log1p(-c) / c - 1.0 - std::log(2.0));
}

/// lambda_sf(alpha): log mu - alpha below log mu; otherwise
/// 0 ∧ sup_c objective(c), by a grid scan followed by golden-section search.
inline double lambda_sf(double alpha, double mu_hat) {
  if (!(mu_hat > 1.0)) throw PreconditionError("lambda_sf: mu_hat must exceed 1");
  const double log_mu = std::log(mu_hat);
  if (alpha < log_mu) return log_mu - alpha;
  auto f = [&](double c) { return lambda_sf_objective(c, alpha, log_mu); };
  constexpr int n = 4000;
  int best = 1;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 1; i < n; ++i) {
    const double v = f(static_cast<double>(i) / n);
    if (v > best_v) best_v = v, best = i;
  }
  double a = static_cast<double>(best - 1) / n, b = static_cast<double>(best + 1) / n;
  if (a <= 0.0) a = 1e-12;
  if (b >= 1.0) b = 1.0 - 1e-12;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      a = x1, x1 = x2, f1 = f2;
      x2 = a + phi * (b - a), f2 = f(x2);
    } else {
      b = x2, x2 = x1, f2 = f1;
      x1 = b - phi * (b - a), f1 = f(x1);
    }
  }
  const double sup = std::max({best_v, f1, f2, f(0.5 * (a + b))});
  return std::min(0.0, sup);
}

/// Phase-boundary constants for a given connective-constant estimate.
struct PhaseCurves {
  double mu_hat = 0.0;
  double log_mu = 0.0;
  double alpha_star = 0.0;
  double g_star = 0.0;
  double q = 0.0;

  explicit PhaseCurves(double mu)
      : mu_hat(mu), log_mu(std::log(mu)), alpha_star(bounds::alpha_star(mu)), g_star(g(alpha_star)),
        q(q_choice(mu)) {}

  double c1() const { return 1.0 - q; }
  double c2() const { return alpha_star; }

  double alpha_c(double lambda) const {
    if (lambda <= 0.0) return log_mu - lambda;
    return std::max(log_mu - (1.0 - q) * lambda, alpha_star);
  }
  double lambda_sf(double alpha) const { return bounds::lambda_sf(alpha, mu_hat); }
  double lambda_0(double alpha) const { return bounds::lambda_0(q, alpha); }
  double b1(double alpha, double lambda) const { return bounds::b1(alpha, lambda, q); }
  double b2(double alpha) const { return bounds::b2(alpha, q); }
};

inline double alpha_c(double lambda, double mu_hat) { return PhaseCurves(mu_hat).alpha_c(lambda); }

}  // namespace isap::bounds

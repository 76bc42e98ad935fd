#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cadence {

namespace detail {

inline constexpr int kGammaMaxIter = 1000;
inline constexpr double kGammaEps = 1e-15;
inline constexpr double kTiny = 1e-300;

// Series expansion of the regularized lower incomplete gamma, for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction (modified Lentz) for the regularized upper incomplete
// gamma, for x >= a + 1.
inline double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kGammaMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double beta_cf(double a, double b, double x) {
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kGammaMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kGammaEps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double regularized_gamma_p(double a, double x) {
  if (a <= 0.0) throw std::invalid_argument("regularized_gamma_p: a must be > 0");
  if (x < 0.0) throw std::invalid_argument("regularized_gamma_p: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double regularized_gamma_q(double a, double x) {
  if (a <= 0.0) throw std::invalid_argument("regularized_gamma_q: a must be > 0");
  if (x < 0.0) throw std::invalid_argument("regularized_gamma_q: x must be >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

/// Upper tail of the chi-squared distribution with `dof` degrees of freedom.
inline double chi_squared_sf(double x, int dof) {
  if (dof < 1) throw std::invalid_argument("chi_squared_sf: dof must be >= 1");
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * dof, 0.5 * x);
}

/// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0)
    throw std::invalid_argument("regularized_incomplete_beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                             std::lgamma(b) + a * std::log(x) +
                             b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0))
    return bt * detail::beta_cf(a, b, x) / a;
  return 1.0 - bt * detail::beta_cf(b, a, 1.0 - x) / b;
}

inline double student_t_cdf(double t, int dof) {
  if (dof < 1) throw std::invalid_argument("student_t_cdf: dof must be >= 1");
  const double nu = static_cast<double>(dof);
  const double x = nu / (nu + t * t);
  const double half_tail = 0.5 * regularized_incomplete_beta(0.5 * nu, 0.5, x);
  return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

/// Quantile of the Student-t distribution, by bisection on the CDF.
inline double student_t_quantile(double p, int dof) {
  if (dof < 1) throw std::invalid_argument("student_t_quantile: dof must be >= 1");
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("student_t_quantile: p must be in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(1.0 - p, dof);
  double lo = 0.0, hi = 1.0;
  while (student_t_cdf(hi, dof) < p && hi < 1e300) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, dof) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-14 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace cadence

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace abmix::math {

inline constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double inv_logit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + exp(a)) without overflow.
inline double log1p_exp(double a) {
  if (a > 0.0) return a + std::log1p(std::exp(-a));
  return std::log1p(std::exp(a));
}

/// log(exp(a) - exp(b)) for a >= b.
inline double log_diff_exp(double a, double b) {
  if (b == kNegInf) return a;
  return a + std::log1p(-std::exp(b - a));
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline double normal_log_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * kLog2Pi;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// log Phi(x), stable far into the left tail (asymptotic series below -10).
inline double normal_log_cdf(double x) {
  if (x > -10.0) {
    const double p = normal_cdf(x);
    if (p > 0.0) return std::log(p);
  }
  // Mills-ratio expansion: Phi(x) ~ phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6)
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - 0.5 * kLog2Pi - std::log(-x) + std::log(series);
}

/// Sum in a canonical (ascending) order so the result is independent of input order.
inline double ordered_sum(std::vector<double>& scratch) {
  std::sort(scratch.begin(), scratch.end());
  double s = 0.0;
  for (double v : scratch) s += v;
  return s;
}

inline double sqr(double x) { return x * x; }

}  // namespace abmix::math

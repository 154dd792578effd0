#pragma once

// Reference implementations used as test oracles. None of them call into
// the library's numerics.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "evseq/model.hpp"

namespace oracle {

/// Linear interpolation between order statistics at h = (n - 1) q, found by
/// selection rather than a full sort.
inline double quantile(std::vector<double> v, double q) {
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + (h - static_cast<double>(lo)) * (b - a);
}

struct Tukey {
  double lower, upper;
  std::set<std::size_t> outliers;  // indices into the input
};

inline Tukey tukey(const std::vector<double>& v, double w) {
  const double q1 = quantile(v, 0.25), q3 = quantile(v, 0.75);
  Tukey t{q1 - w * (q3 - q1), q3 + w * (q3 - q1), {}};
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < t.lower || v[i] > t.upper) t.outliers.insert(i);
  return t;
}

// ---- Distribution tails by numeric integration ------------------------------

inline double t_density(double x, double df) {
  return std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI) -
                  (df + 1) / 2 * std::log1p(x * x / df));
}

inline double chisq_density(double x, double k) {
  if (x <= 0) return 0;
  return std::exp((k / 2 - 1) * std::log(x) - x / 2 - k / 2 * std::log(2.0) - std::lgamma(k / 2));
}

inline double f_density(double x, double d1, double d2) {
  if (x <= 0) return 0;
  const double lb = std::lgamma(d1 / 2) + std::lgamma(d2 / 2) - std::lgamma((d1 + d2) / 2);
  return std::exp(d1 / 2 * std::log(d1 / d2) + (d1 / 2 - 1) * std::log(x) - (d1 + d2) / 2 * std::log1p(d1 * x / d2) - lb);
}

/// Integral of `f` over [a, inf).
template <class F>
double upper_tail(F f, double a) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double u) { return f(a + u); }, 0.0, std::numeric_limits<double>::infinity());
}

/// Integral of `f` over [0, a].
template <class F>
double lower_part(F f, double a) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, 0.0, a);
}

inline double t_two_sided(double t, double df) {
  return 2 * upper_tail([&](double x) { return t_density(x, df); }, std::fabs(t));
}

/// Upper tail; for small x the complement of the body is more accurate.
inline double chisq_upper(double x, double k) {
  auto f = [&](double u) { return chisq_density(u, k); };
  if (x < k) return 1 - lower_part(f, x);
  return upper_tail(f, x);
}

inline double f_upper(double x, double d1, double d2) {
  auto f = [&](double u) { return f_density(u, d1, d2); };
  if (x < 1) return 1 - lower_part(f, x);
  return upper_tail(f, x);
}

/// N (ad - bc)^2 / (r1 r2 c1 c2) for [[a, b], [c, d]].
inline double chi_square_2x2(double a, double b, double c, double d) {
  const double n = a + b + c + d;
  const double num = n * (a * d - b * c) * (a * d - b * c);
  return num / ((a + b) * (c + d) * (a + c) * (b + d));
}

/// Pooled two-sample t statistic.
inline double pooled_t(const std::vector<double>& x, const std::vector<double>& y) {
  auto mean = [](const std::vector<double>& v) {
    long double s = 0;
    for (double a : v) s += a;
    return static_cast<double>(s / v.size());
  };
  const double mx = mean(x), my = mean(y);
  long double ss = 0;
  for (double a : x) ss += (a - mx) * (a - mx);
  for (double a : y) ss += (a - my) * (a - my);
  const double sp2 = static_cast<double>(ss) / static_cast<double>(x.size() + y.size() - 2);
  return (mx - my) / std::sqrt(sp2 * (1.0 / x.size() + 1.0 / y.size()));
}

}  // namespace oracle

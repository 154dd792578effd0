#include "evseq/special.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "evseq/error.hpp"

namespace evseq {

namespace {

void check(double statistic, double df) {
  if (!std::isfinite(statistic)) throw NumericError("non-finite test statistic");
  if (!(df > 0) || !std::isfinite(df)) throw ConfigError("degrees of freedom must be positive, got " + std::to_string(df));
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

// P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)
double t_two_sided_p(double t, double df) {
  check(t, df);
  if (t == 0.0) return 1.0;
  const double x = df / (df + t * t);
  return clamp01(boost::math::ibeta(df / 2.0, 0.5, x));
}

// P(X > x) = Q(df/2, x/2)
double chisq_upper_p(double x, double df) {
  check(x, df);
  if (x <= 0.0) return 1.0;
  return clamp01(boost::math::gamma_q(df / 2.0, x / 2.0));
}

// P(F > f) = I_{d2/(d2+d1 f)}(d2/2, d1/2)
double f_upper_p(double f, double df1, double df2) {
  check(f, df1);
  check(f, df2);
  if (f <= 0.0) return 1.0;
  const double x = df2 / (df2 + df1 * f);
  return clamp01(boost::math::ibeta(df2 / 2.0, df1 / 2.0, x));
}

double special_cdf(Distribution kind, double statistic, double df1, double df2) {
  switch (kind) {
    case Distribution::t: return t_two_sided_p(statistic, df1);
    case Distribution::chisq: return chisq_upper_p(statistic, df1);
    case Distribution::f: return f_upper_p(statistic, df1, df2);
  }
  return 1.0;
}

}  // namespace evseq

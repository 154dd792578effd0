#pragma once

namespace evseq {

enum class Distribution { t, chisq, f };

/// p-value of a test statistic: two-sided for t, upper tail for chi-square
/// and F. `df2` is used by F only. Throws NumericError for a non-finite
/// statistic and ConfigError for non-positive degrees of freedom.
double special_cdf(Distribution kind, double statistic, double df1, double df2 = 0.0);

double t_two_sided_p(double t, double df);
double chisq_upper_p(double x, double df);
double f_upper_p(double f, double df1, double df2);

}  // namespace evseq

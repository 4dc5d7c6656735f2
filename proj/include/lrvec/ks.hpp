#pragma once

#include <functional>
#include <vector>

namespace lrvec {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// P[K > lambda] for the Kolmogorov distribution, absolute error below 1e-8.
double kolmogorov_survival(double lambda);

/// One-sample Kolmogorov-Smirnov test of `samples` against `cdf`.
/// D_n = sup |F_n - F| over the sample points; the p-value is the asymptotic
/// Kolmogorov tail at sqrt(n) D_n. InputError on an empty sample.
KsResult ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace lrvec

#include "lrvec/ks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lrvec/errors.hpp"

namespace lrvec {

namespace {
constexpr double kTermTol = 1e-10;
constexpr int kMaxTerms = 200;
}  // namespace

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form of the CDF; converges fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double scale = std::sqrt(2.0 * std::numbers::pi) / lambda;
    double cdf = 0.0;
    for (int k = 1; k <= kMaxTerms; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
      cdf += term;
      if (term * scale < kTermTol) break;
    }
    return std::clamp(1.0 - scale * cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= kMaxTerms; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < kTermTol) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InputError("ks_statistic: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return KsResult{d, kolmogorov_survival(std::sqrt(n) * d)};
}

}  // namespace lrvec

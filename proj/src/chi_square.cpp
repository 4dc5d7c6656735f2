#include <cmath>
#include <limits>
#include <string>

#include "lrvec/errors.hpp"
#include "lrvec/limitdist.hpp"

namespace lrvec {

namespace {

constexpr int kMaxTerms = 10000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

// e^{-x} x^a / Gamma(a)
double gamma_prefactor(double a, double x) { return std::exp(a * std::log(x) - x - std::lgamma(a)); }

// Lower regularized gamma P(a, x) by its power series; use for x < a + 1.
double lower_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxTerms; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * gamma_prefactor(a, x);
}

// Upper regularized gamma Q(a, x) by its continued fraction (modified Lentz);
// use for x >= a + 1.
double upper_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return gamma_prefactor(a, x) * h;
}

void check_args(int r, double z) {
  if (r < 1) throw InputError("chi-square degrees of freedom must be at least 1");
  if (std::isnan(z) || z < 0.0) {
    throw InputError("chi-square argument must be nonnegative, got " + std::to_string(z));
  }
}

}  // namespace

double chi_square_survival(int r, double z) {
  check_args(r, z);
  if (z == 0.0) return 1.0;
  if (std::isinf(z)) return 0.0;
  const double a = 0.5 * r;
  const double x = 0.5 * z;
  if (x < a + 1.0) return 1.0 - lower_series(a, x);
  return upper_fraction(a, x);
}

double chi_square_cdf(int r, double z) {
  check_args(r, z);
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return 1.0;
  const double a = 0.5 * r;
  const double x = 0.5 * z;
  if (x < a + 1.0) return lower_series(a, x);
  return 1.0 - upper_fraction(a, x);
}

double chi_square_quantile(int r, double p) {
  if (r < 1) throw InputError("chi-square degrees of freedom must be at least 1");
  if (!(p >= 0.0 && p < 1.0)) throw InputError("chi-square quantile level must lie in [0, 1)");
  if (p == 0.0) return 0.0;
  double lo = 0.0;
  double hi = static_cast<double>(r) + 10.0;
  while (chi_square_cdf(r, hi) < p) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi_square_cdf(r, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace lrvec

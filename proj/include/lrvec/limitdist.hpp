#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lrvec/windows.hpp"

namespace lrvec {

/// Upper tail P[chi2_r > z] via the regularized upper incomplete gamma
/// function Q(r/2, z/2). Absolute accuracy 1e-10. InputError for z < 0 or r < 1.
double chi_square_survival(int r, double z);

/// P[chi2_r <= z].
double chi_square_cdf(int r, double z);

/// The z with P[chi2_r <= z] = p, for p in [0, 1).
double chi_square_quantile(int r, double p);

/// Limit law of the -2 log lambda vector: Q_i = sum_{h=1..r} xi_{h,i}^2 where
/// xi_h = (xi_{h,1}, ..., xi_{h,M}) are independent N(0, R) vectors.
class LimitLaw {
 public:
  LimitLaw(int r, CorrelationMatrix correlation);

  int r() const { return r_; }
  std::size_t windows() const { return static_cast<std::size_t>(correlation_.rows()); }
  const CorrelationMatrix& correlation() const { return correlation_; }

 private:
  int r_;
  CorrelationMatrix correlation_;
};

/// Lower-triangular L with L L^T = R' where R' = R when R is numerically
/// positive definite. Otherwise R' is R with eigenvalues clipped at 1e-12 and
/// its diagonal renormalized to one, factored by a semidefinite Cholesky that
/// zeroes negligible pivots. InputError when R is not a symmetric unit-diagonal
/// matrix; FactorizationError when |L L^T - R| would exceed 1e-8 in any entry.
Eigen::MatrixXd psd_repair_cholesky(const CorrelationMatrix& correlation);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LimitSampleBatch {
  /// count x M; row k is draw k.
  RowMatrix q;
  std::uint64_t seed = 0;
};

/// Draws from the limit law. Draw k uses its own substream of `seed`, so the
/// batch is identical for every thread count.
LimitSampleBatch sample_limit_law(const LimitLaw& law, std::size_t count, std::uint64_t seed,
                                  std::size_t threads = 1);

struct ExceedanceEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo estimate of P[Q_1 > t_1, ..., Q_M > t_M] with binomial
/// standard error. Requires count >= 1000 and nonnegative thresholds.
ExceedanceEstimate joint_exceedance(const LimitLaw& law, const std::vector<double>& thresholds,
                                    std::size_t count, std::uint64_t seed, std::size_t threads = 1);

/// Covariance of Q under the limit law: 2 r on the diagonal, 2 r R_ij^2 off it.
Eigen::MatrixXd theoretical_cov_q(const LimitLaw& law);

}  // namespace lrvec

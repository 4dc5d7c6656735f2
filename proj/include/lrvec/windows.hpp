#pragma once

#include <cstdint>
#include <vector>

#include "lrvec/mle.hpp"
#include "lrvec/model.hpp"

namespace lrvec {

/// P populations with sample sizes n_1..n_P, grouped into M = P - G + 1
/// overlapping windows of G consecutive populations. Window i (0-based) covers
/// populations i .. i + G - 1.
class GroupingScheme {
 public:
  GroupingScheme(std::size_t group_width, std::vector<std::uint64_t> sizes);

  std::size_t populations() const { return sizes_.size(); }
  std::size_t group_width() const { return group_width_; }
  std::size_t windows() const { return sizes_.size() - group_width_ + 1; }
  const std::vector<std::uint64_t>& sizes() const { return sizes_; }

  /// Total sample size of window i.
  std::uint64_t window_size(std::size_t i) const;

 private:
  std::size_t group_width_;
  std::vector<std::uint64_t> sizes_;
};

/// One sample per population, in population order.
using Dataset = std::vector<Sample>;

/// Throws InputError unless population p has exactly n_p observations.
void check_dataset(const Dataset& data, const GroupingScheme& scheme);

/// Concatenation of the populations in window i.
Sample pool_window(const Dataset& data, const GroupingScheme& scheme, std::size_t window);

/// M x M window correlation matrix. Symmetric, unit diagonal, entries in [0, 1],
/// zero outside the band |i - j| < G.
using CorrelationMatrix = Eigen::MatrixXd;

/// Finite-sample window correlation
///   R_ij = (sum of n_p shared by windows i and j) / sqrt(N_i * N_j),
/// with N_i the total size of window i, and R_ij = 0 for |i - j| >= G.
CorrelationMatrix rho_matrix(const GroupingScheme& scheme);

struct LrOptions {
  SolverOptions solver;
  /// Start each window's fits from the previous window's estimates.
  bool warm_start = false;
};

struct WindowLr {
  /// -2 log lambda for the window, clamped at zero.
  double statistic = 0.0;
  FitResult constrained;
  FitResult unconstrained;
  /// A fit did not converge, or the constrained maximum exceeded the
  /// unconstrained one by more than the round-off allowance.
  bool failed = false;
};

/// -2 log of the likelihood ratio for every window. Window failures are marked,
/// not thrown.
std::vector<WindowLr> lr_vector(const Model& model, const Dataset& data,
                                const GroupingScheme& scheme, const HypothesisSpec& hyp,
                                const LrOptions& options = {});

std::vector<double> statistics(const std::vector<WindowLr>& windows);

/// (M d) x (M d) block matrix whose (i, j) block is R_ij * I(theta0)^{-1}:
/// the asymptotic covariance of the stacked sqrt(N_i) (theta_hat_i - theta0).
Eigen::MatrixXd estimator_covariance(const Model& model, const ParameterVector& theta0,
                                    const GroupingScheme& scheme);

}  // namespace lrvec

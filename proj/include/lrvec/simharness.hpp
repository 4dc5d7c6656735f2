#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lrvec/ks.hpp"
#include "lrvec/limitdist.hpp"
#include "lrvec/mle.hpp"
#include "lrvec/model.hpp"
#include "lrvec/windows.hpp"

namespace lrvec {

/// A Monte Carlo study: data drawn i.i.d. at theta0 in every population,
/// grouped by `scheme`. With a hypothesis the study checks the joint limit law
/// of the -2 log lambda vector (theta0 must then lie in the null subspace);
/// the MLE covariance check runs in every study.
struct StudyConfig {
  std::shared_ptr<const Model> model;
  ParameterVector theta0;
  GroupingScheme scheme;
  std::optional<HypothesisSpec> hyp;
  std::size_t replicates = 1000;
  std::uint64_t seed = 1;
  std::size_t limit_law_draws = 100000;
  /// Marginal chi-square levels whose quantiles define the joint exceedance
  /// regions compared against the limit law. Empty skips the comparison.
  std::vector<double> threshold_levels = {0.9, 0.95};
  LrOptions lr;
  /// 0 means all cores. Never affects results.
  std::size_t threads = 1;
};

inline constexpr std::size_t kMinReplicates = 100;
inline constexpr double kMaxFailureRate = 0.05;

/// Throws InputError on an invalid configuration.
void validate_study(const StudyConfig& config);

/// Full dataset of one replicate, drawn from the replicate's own substream.
Dataset simulate_dataset(const StudyConfig& config, std::size_t replicate);

struct ReplicateResult {
  /// -2 log lambda per window; empty without a hypothesis.
  std::vector<double> lr;
  /// sqrt(N_i) (theta_hat_i - theta0) per window.
  std::vector<Eigen::VectorXd> scaled_deviation;
  bool failed = false;
};

ReplicateResult replicate_lr(const StudyConfig& config, std::size_t replicate);

struct CovarianceComparison {
  Eigen::MatrixXd empirical;
  Eigen::MatrixXd theoretical;
  /// Delta-method Monte Carlo standard error of each empirical entry.
  Eigen::MatrixXd standard_error;
  /// max |empirical - theoretical| / standard_error over entries.
  double max_sigma = 0.0;
};

/// Sample covariance of the rows of `samples` against a reference matrix.
CovarianceComparison compare_covariance(const RowMatrix& samples,
                                        const Eigen::MatrixXd& theoretical);

struct ExceedanceComparison {
  double level = 0.0;
  std::vector<double> thresholds;
  double empirical = 0.0;
  double empirical_se = 0.0;
  ExceedanceEstimate limit;
  /// |empirical - limit| over the pooled two-proportion standard error.
  double sigma = 0.0;
};

struct StudyReport {
  std::size_t replicates = 0;
  std::size_t failures = 0;
  /// Per-window KS test of -2 log lambda against chi2_r.
  std::vector<KsResult> ks;
  std::optional<CovarianceComparison> q_covariance;
  CovarianceComparison estimator_covariance;
  std::vector<ExceedanceComparison> exceedance;
};

/// Runs every replicate, drops failures (StudyError above a 5% failure rate)
/// and compares the surviving replicates with the asymptotic laws.
StudyReport run_study(const StudyConfig& config);

struct AcceptanceThresholds {
  double ks_alpha = 0.01;
  double max_sigma = 3.0;
};

/// True when every KS p-value exceeds ks_alpha and every covariance entry and
/// exceedance probability lies within max_sigma standard errors.
bool study_passes(const StudyReport& report, const AcceptanceThresholds& thresholds = {});

}  // namespace lrvec

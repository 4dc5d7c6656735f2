#include "lrvec/simharness.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lrvec/errors.hpp"
#include "lrvec/parallel.hpp"

namespace lrvec {

void validate_study(const StudyConfig& config) {
  if (!config.model) throw InputError("study has no model");
  const Model& model = *config.model;
  if (config.replicates < kMinReplicates) {
    throw InputError("study needs at least " + std::to_string(kMinReplicates) +
                     " replicates, got " + std::to_string(config.replicates));
  }
  if (config.theta0.size() != model.dim()) {
    throw InputError("theta0 has dimension " + std::to_string(config.theta0.size()) +
                     ", model expects " + std::to_string(model.dim()));
  }
  if (!model.in_domain(config.theta0)) throw InputError("theta0 lies outside the parameter space");
  if (config.hyp) {
    config.hyp->check_against(model);
    if (!config.hyp->contains(config.theta0)) {
      throw InputError("theta0 must have its first r = " + std::to_string(config.hyp->r()) +
                       " coordinates equal to zero for a likelihood-ratio study");
    }
    if (!config.threshold_levels.empty() && config.limit_law_draws < 1000) {
      throw InputError("limit_law_draws must be at least 1000");
    }
  }
  for (double level : config.threshold_levels) {
    if (!(level > 0.0 && level < 1.0)) throw InputError("threshold levels must lie in (0, 1)");
  }
}

Dataset simulate_dataset(const StudyConfig& config, std::size_t replicate) {
  Stream rng = substream(config.seed, StreamPurpose::kReplicateData, replicate);
  Dataset data;
  data.reserve(config.scheme.populations());
  for (auto n : config.scheme.sizes()) data.push_back(config.model->sample(config.theta0, n, rng));
  return data;
}

ReplicateResult replicate_lr(const StudyConfig& config, std::size_t replicate) {
  const Model& model = *config.model;
  const GroupingScheme& scheme = config.scheme;
  const Dataset data = simulate_dataset(config, replicate);

  ReplicateResult out;
  std::vector<FitResult> full;
  if (config.hyp) {
    const auto windows = lr_vector(model, data, scheme, *config.hyp, config.lr);
    for (const auto& w : windows) {
      out.lr.push_back(w.statistic);
      out.failed = out.failed || w.failed;
      full.push_back(w.unconstrained);
    }
  } else {
    for (std::size_t i = 0; i < scheme.windows(); ++i) {
      full.push_back(fit_unconstrained(model, pool_window(data, scheme, i), config.lr.solver));
      out.failed = out.failed || !full.back().converged;
    }
  }
  for (std::size_t i = 0; i < scheme.windows(); ++i) {
    const double root_n = std::sqrt(static_cast<double>(scheme.window_size(i)));
    out.scaled_deviation.push_back(root_n *
                                   (full[i].theta_hat.coords() - config.theta0.coords()));
  }
  return out;
}

CovarianceComparison compare_covariance(const RowMatrix& samples,
                                        const Eigen::MatrixXd& theoretical) {
  const auto n = samples.rows();
  const auto k = samples.cols();
  if (n < 2) throw InputError("covariance comparison needs at least two samples");
  if (theoretical.rows() != k || theoretical.cols() != k) {
    throw InputError("reference covariance has the wrong shape");
  }
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const RowMatrix centered = samples.rowwise() - mean;
  const double nd = static_cast<double>(n);

  CovarianceComparison out;
  out.theoretical = theoretical;
  out.empirical = (centered.transpose() * centered) / (nd - 1.0);
  out.standard_error = Eigen::MatrixXd::Zero(k, k);
  out.max_sigma = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      const double m22 = (centered.col(i).array().square() * centered.col(j).array().square()).mean();
      const double c = (centered.col(i).array() * centered.col(j).array()).mean();
      const double se = std::sqrt(std::max(m22 - c * c, 0.0) / nd);
      out.standard_error(i, j) = out.standard_error(j, i) = se;
      const double diff = std::abs(out.empirical(i, j) - theoretical(i, j));
      double sigma = 0.0;
      if (se > 0.0) {
        sigma = diff / se;
      } else if (diff > 0.0) {
        sigma = std::numeric_limits<double>::infinity();
      }
      out.max_sigma = std::max(out.max_sigma, sigma);
    }
  }
  return out;
}

StudyReport run_study(const StudyConfig& config) {
  validate_study(config);
  const GroupingScheme& scheme = config.scheme;
  const std::size_t m = scheme.windows();
  const std::size_t d = config.model->dim();

  std::vector<ReplicateResult> results(config.replicates);
  parallel_for(config.replicates, config.threads,
               [&](std::size_t k) { results[k] = replicate_lr(config, k); });

  StudyReport report;
  report.replicates = config.replicates;
  std::vector<const ReplicateResult*> kept;
  for (const auto& r : results) {
    if (r.failed) {
      ++report.failures;
    } else {
      kept.push_back(&r);
    }
  }
  const double failure_rate =
      static_cast<double>(report.failures) / static_cast<double>(config.replicates);
  if (failure_rate > kMaxFailureRate) {
    throw StudyError(std::to_string(report.failures) + " of " + std::to_string(config.replicates) +
                     " replicates failed, above the 5% budget");
  }
  const auto kept_n = static_cast<Eigen::Index>(kept.size());

  RowMatrix deviations(kept_n, static_cast<Eigen::Index>(m * d));
  for (Eigen::Index k = 0; k < kept_n; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      deviations.row(k).segment(static_cast<Eigen::Index>(i * d), static_cast<Eigen::Index>(d)) =
          kept[static_cast<std::size_t>(k)]->scaled_deviation[i].transpose();
    }
  }
  report.estimator_covariance =
      compare_covariance(deviations, estimator_covariance(*config.model, config.theta0, scheme));

  if (!config.hyp) return report;

  const int r = static_cast<int>(config.hyp->r());
  RowMatrix q(kept_n, static_cast<Eigen::Index>(m));
  for (Eigen::Index k = 0; k < kept_n; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      q(k, static_cast<Eigen::Index>(i)) = kept[static_cast<std::size_t>(k)]->lr[i];
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    const auto col = q.col(static_cast<Eigen::Index>(i));
    report.ks.push_back(ks_statistic(std::vector<double>(col.begin(), col.end()),
                                     [r](double z) { return chi_square_cdf(r, std::max(z, 0.0)); }));
  }

  const LimitLaw law(r, rho_matrix(scheme));
  report.q_covariance = compare_covariance(q, theoretical_cov_q(law));

  for (double level : config.threshold_levels) {
    ExceedanceComparison cmp;
    cmp.level = level;
    cmp.thresholds.assign(m, chi_square_quantile(r, level));
    std::size_t hits = 0;
    for (Eigen::Index k = 0; k < kept_n; ++k) {
      bool all = true;
      for (std::size_t i = 0; i < m && all; ++i) {
        all = q(k, static_cast<Eigen::Index>(i)) > cmp.thresholds[i];
      }
      hits += all ? 1 : 0;
    }
    const double nk = static_cast<double>(kept_n);
    cmp.empirical = static_cast<double>(hits) / nk;
    cmp.empirical_se = std::sqrt(cmp.empirical * (1.0 - cmp.empirical) / nk);
    cmp.limit =
        joint_exceedance(law, cmp.thresholds, config.limit_law_draws, config.seed, config.threads);
    const double nl = static_cast<double>(cmp.limit.count);
    const double pooled = (static_cast<double>(hits) + cmp.limit.probability * nl) / (nk + nl);
    const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / nk + 1.0 / nl));
    const double diff = std::abs(cmp.empirical - cmp.limit.probability);
    cmp.sigma = se > 0.0 ? diff / se : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    report.exceedance.push_back(std::move(cmp));
  }
  return report;
}

bool study_passes(const StudyReport& report, const AcceptanceThresholds& thresholds) {
  for (const auto& ks : report.ks) {
    if (!(ks.p_value > thresholds.ks_alpha)) return false;
  }
  if (!(report.estimator_covariance.max_sigma <= thresholds.max_sigma)) return false;
  if (report.q_covariance && !(report.q_covariance->max_sigma <= thresholds.max_sigma)) return false;
  for (const auto& e : report.exceedance) {
    if (!(e.sigma <= thresholds.max_sigma)) return false;
  }
  return true;
}

}  // namespace lrvec

#include "lrvec/windows.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lrvec/errors.hpp"

namespace lrvec {

GroupingScheme::GroupingScheme(std::size_t group_width, std::vector<std::uint64_t> sizes)
    : group_width_(group_width), sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw InputError("grouping scheme needs at least one population");
  if (group_width_ < 1 || group_width_ > sizes_.size()) {
    throw InputError("group width G = " + std::to_string(group_width_) + " must lie in [1, P = " +
                     std::to_string(sizes_.size()) + "]");
  }
  for (std::size_t p = 0; p < sizes_.size(); ++p) {
    if (sizes_[p] < 1) {
      throw InputError("population " + std::to_string(p + 1) + " has no observations");
    }
  }
}

std::uint64_t GroupingScheme::window_size(std::size_t i) const {
  const auto first = sizes_.begin() + static_cast<std::ptrdiff_t>(i);
  return std::accumulate(first, first + static_cast<std::ptrdiff_t>(group_width_), std::uint64_t{0});
}

void check_dataset(const Dataset& data, const GroupingScheme& scheme) {
  if (data.size() != scheme.populations()) {
    throw InputError("dataset has " + std::to_string(data.size()) + " populations, scheme expects " +
                     std::to_string(scheme.populations()));
  }
  for (std::size_t p = 0; p < data.size(); ++p) {
    if (data[p].size() != scheme.sizes()[p]) {
      throw InputError("population " + std::to_string(p + 1) + " has " +
                       std::to_string(data[p].size()) + " observations, scheme expects " +
                       std::to_string(scheme.sizes()[p]));
    }
    if (data[p].dim() != data.front().dim()) {
      throw InputError("populations have different observation dimensions");
    }
  }
}

Sample pool_window(const Dataset& data, const GroupingScheme& scheme, std::size_t window) {
  Sample pooled(data.at(window).dim());
  pooled.reserve(scheme.window_size(window));
  for (std::size_t p = window; p < window + scheme.group_width(); ++p) pooled.append(data[p]);
  return pooled;
}

CorrelationMatrix rho_matrix(const GroupingScheme& scheme) {
  const std::size_t m = scheme.windows();
  const std::size_t g = scheme.group_width();
  const auto& n = scheme.sizes();
  std::vector<std::uint64_t> totals(m);
  for (std::size_t i = 0; i < m; ++i) totals[i] = scheme.window_size(i);

  CorrelationMatrix rho = CorrelationMatrix::Zero(static_cast<Eigen::Index>(m),
                                                  static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    for (std::size_t j = i + 1; j < m && j - i < g; ++j) {
      // Windows i < j share populations j .. i + G - 1.
      std::uint64_t shared = 0;
      for (std::size_t p = j; p <= i + g - 1; ++p) shared += n[p];
      const double denom =
          std::sqrt(static_cast<double>(totals[i]) * static_cast<double>(totals[j]));
      const double value = static_cast<double>(shared) / denom;
      rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
      rho(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
    }
  }
  return rho;
}

std::vector<WindowLr> lr_vector(const Model& model, const Dataset& data,
                                const GroupingScheme& scheme, const HypothesisSpec& hyp,
                                const LrOptions& options) {
  check_dataset(data, scheme);
  hyp.check_against(model);

  std::vector<WindowLr> out;
  out.reserve(scheme.windows());
  ParameterVector init_full = ParameterVector::zeros(model.dim());
  ParameterVector init_null = ParameterVector::zeros(model.dim());
  for (std::size_t i = 0; i < scheme.windows(); ++i) {
    const Sample pooled = pool_window(data, scheme, i);
    WindowLr w{0.0, fit_constrained(model, pooled, hyp, init_null, options.solver),
               fit_unconstrained(model, pooled, init_full, options.solver), false};
    const double raw = -2.0 * (w.constrained.log_lik - w.unconstrained.log_lik);
    const double clamp_tol = 1e-8 * (1.0 + static_cast<double>(pooled.size()));
    w.failed = !w.constrained.converged || !w.unconstrained.converged || !std::isfinite(raw) ||
               raw <= -clamp_tol;
    w.statistic = std::isfinite(raw) ? std::max(raw, 0.0) : 0.0;
    if (options.warm_start) {
      if (w.unconstrained.converged) init_full = w.unconstrained.theta_hat;
      if (w.constrained.converged) init_null = w.constrained.theta_hat;
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<double> statistics(const std::vector<WindowLr>& windows) {
  std::vector<double> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(w.statistic);
  return out;
}

Eigen::MatrixXd estimator_covariance(const Model& model, const ParameterVector& theta0,
                                    const GroupingScheme& scheme) {
  const Eigen::MatrixXd info = fisher_information(model, theta0);
  const auto d = info.rows();
  const Eigen::MatrixXd inv = info.llt().solve(Eigen::MatrixXd::Identity(d, d));
  const CorrelationMatrix rho = rho_matrix(scheme);
  const auto m = rho.rows();
  Eigen::MatrixXd cov(m * d, m * d);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) cov.block(i * d, j * d, d, d) = rho(i, j) * inv;
  }
  return cov;
}

}  // namespace lrvec

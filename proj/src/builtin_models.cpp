#include <cmath>
#include <numbers>
#include <string>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "lrvec/errors.hpp"
#include "lrvec/model.hpp"
#include "lrvec/summation.hpp"

namespace lrvec {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

void require_finite(ObservationView x, const std::string& model) {
  for (double v : x) {
    if (!std::isfinite(v)) throw InputError(model + ": non-finite observation");
  }
}

// Gaussian with unknown mean and known covariance.
class GaussianMean final : public Model {
 public:
  explicit GaussianMean(const Eigen::MatrixXd& covariance) : covariance_(covariance) {
    if (covariance.rows() < 1 || covariance.rows() != covariance.cols()) {
      throw InputError("gaussian_mean: covariance must be a non-empty square matrix");
    }
    if (!covariance.allFinite()) throw InputError("gaussian_mean: non-finite covariance");
    const double scale = covariance.cwiseAbs().maxCoeff();
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw InputError("gaussian_mean: covariance is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() != Eigen::Success) {
      throw InputError("gaussian_mean: covariance is not positive definite");
    }
    chol_ = llt.matrixL();
    const auto d = covariance.rows();
    precision_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
    precision_ = 0.5 * (precision_ + precision_.transpose()).eval();
    const double log_det = 2.0 * chol_.diagonal().array().log().sum();
    log_base_ = -0.5 * (static_cast<double>(d) * kLogTwoPi + log_det);
  }

  std::string name() const override { return "gaussian_mean"; }
  std::size_t dim() const override { return static_cast<std::size_t>(covariance_.rows()); }
  std::size_t observation_dim() const override { return dim(); }

  bool in_domain(const ParameterVector& theta) const override { return theta.size() == dim(); }

  void validate(ObservationView x) const override {
    if (x.size() != dim()) throw InputError("gaussian_mean: observation has the wrong dimension");
    require_finite(x, name());
  }

  double log_density(ObservationView x, const ParameterVector& theta) const override {
    const Eigen::VectorXd r = residual(x, theta);
    return log_base_ - 0.5 * r.dot(precision_ * r);
  }

  Eigen::VectorXd gradient(ObservationView x, const ParameterVector& theta) const override {
    return precision_ * residual(x, theta);
  }

  Eigen::MatrixXd hessian(ObservationView /*x*/, const ParameterVector& /*theta*/) const override {
    return -precision_;
  }

  double log_base(ObservationView /*x*/) const override { return log_base_; }

  double log_base_sum(const Sample& data) const override {
    return log_base_ * static_cast<double>(data.size());
  }

  std::optional<Eigen::MatrixXd> analytic_fisher(const ParameterVector& /*theta*/) const override {
    return precision_;
  }

  Sample sample(const ParameterVector& theta, std::size_t count, Stream& rng) const override {
    const auto d = covariance_.rows();
    boost::random::normal_distribution<double> normal;
    Sample out(dim());
    out.reserve(count);
    Eigen::VectorXd z(d);
    for (std::size_t j = 0; j < count; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) z(k) = normal(rng);
      const Eigen::VectorXd x = theta.coords() + chol_ * z;
      out.push_back(ObservationView(x.data(), static_cast<std::size_t>(d)));
    }
    return out;
  }

  ParameterVector moment_estimate(const Sample& data) const override {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(covariance_.rows());
    for (std::size_t j = 0; j < data.size(); ++j) {
      mean += Eigen::Map<const Eigen::VectorXd>(data[j].data(), covariance_.rows());
    }
    if (!data.empty()) mean /= static_cast<double>(data.size());
    return ParameterVector(mean);
  }

  LikelihoodTerms accumulate(const Sample& data, const ParameterVector& theta,
                             Derivatives want) const override {
    const auto d = covariance_.rows();
    const double n = static_cast<double>(data.size());
    LikelihoodTerms out;
    CompensatedSum kernel;
    Eigen::VectorXd residual_sum = Eigen::VectorXd::Zero(d);
    if (d == 1) {
      const double p = precision_(0, 0);
      const double mu = theta[0];
      double sum = 0.0;
      for (double x : data.values()) {
        const double r = x - mu;
        kernel += -0.5 * p * r * r;
        sum += r;
      }
      residual_sum(0) = sum;
    } else {
      Eigen::VectorXd r(d);
      for (std::size_t j = 0; j < data.size(); ++j) {
        r = Eigen::Map<const Eigen::VectorXd>(data[j].data(), d) - theta.coords();
        kernel += -0.5 * r.dot(precision_ * r);
        residual_sum += r;
      }
    }
    out.log_kernel = kernel.value();
    if (want != Derivatives::kNone) out.gradient = precision_ * residual_sum;
    if (want == Derivatives::kHessian) out.hessian = -n * precision_;
    return out;
  }

  std::vector<std::pair<std::string, std::vector<double>>> describe() const override {
    std::vector<double> flat;
    for (Eigen::Index i = 0; i < covariance_.rows(); ++i) {
      for (Eigen::Index j = 0; j < covariance_.cols(); ++j) flat.push_back(covariance_(i, j));
    }
    return {{"covariance", flat}};
  }

 private:
  Eigen::VectorXd residual(ObservationView x, const ParameterVector& theta) const {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), covariance_.rows()) - theta.coords();
  }

  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd chol_;
  Eigen::MatrixXd precision_;
  double log_base_ = 0.0;
};

// Scalar Gaussian N(mu, exp(2 s)), theta = (mu, s).
class GaussianMeanLogSd final : public Model {
 public:
  std::string name() const override { return "gaussian_mean_logsd"; }
  std::size_t dim() const override { return 2; }
  std::size_t observation_dim() const override { return 1; }

  bool in_domain(const ParameterVector& theta) const override {
    if (theta.size() != 2) return false;
    const double inv_var = std::exp(-2.0 * theta[1]);
    return std::isfinite(inv_var) && inv_var > 0.0 && std::isfinite(1.0 / inv_var);
  }

  void validate(ObservationView x) const override {
    if (x.size() != 1) throw InputError("gaussian_mean_logsd: observations are scalars");
    require_finite(x, name());
  }

  double log_density(ObservationView x, const ParameterVector& theta) const override {
    const double r = x[0] - theta[0];
    return -0.5 * kLogTwoPi - theta[1] - 0.5 * r * r * std::exp(-2.0 * theta[1]);
  }

  Eigen::VectorXd gradient(ObservationView x, const ParameterVector& theta) const override {
    const double r = x[0] - theta[0];
    const double w = std::exp(-2.0 * theta[1]);
    return Eigen::Vector2d(r * w, -1.0 + r * r * w);
  }

  Eigen::MatrixXd hessian(ObservationView x, const ParameterVector& theta) const override {
    const double r = x[0] - theta[0];
    const double w = std::exp(-2.0 * theta[1]);
    Eigen::Matrix2d h;
    h << -w, -2.0 * r * w, -2.0 * r * w, -2.0 * r * r * w;
    return h;
  }

  double log_base(ObservationView /*x*/) const override { return -0.5 * kLogTwoPi; }

  double log_base_sum(const Sample& data) const override {
    return -0.5 * kLogTwoPi * static_cast<double>(data.size());
  }

  std::optional<Eigen::MatrixXd> analytic_fisher(const ParameterVector& theta) const override {
    Eigen::Matrix2d info;
    info << std::exp(-2.0 * theta[1]), 0.0, 0.0, 2.0;
    return Eigen::MatrixXd(info);
  }

  Sample sample(const ParameterVector& theta, std::size_t count, Stream& rng) const override {
    boost::random::normal_distribution<double> normal(theta[0], std::exp(theta[1]));
    std::vector<double> values(count);
    for (auto& v : values) v = normal(rng);
    return Sample(1, std::move(values));
  }

  ParameterVector moment_estimate(const Sample& data) const override {
    if (data.empty()) return ParameterVector::zeros(2);
    const double n = static_cast<double>(data.size());
    double mean = 0.0;
    for (double x : data.values()) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : data.values()) ss += (x - mean) * (x - mean);
    const double var = ss / n;
    return ParameterVector{mean, var > 0.0 ? 0.5 * std::log(var) : 0.0};
  }

  LikelihoodTerms accumulate(const Sample& data, const ParameterVector& theta,
                             Derivatives want) const override {
    const double mu = theta[0];
    const double s = theta[1];
    const double w = std::exp(-2.0 * s);
    const double n = static_cast<double>(data.size());
    CompensatedSum ss;
    double r_sum = 0.0;
    for (double x : data.values()) {
      const double r = x - mu;
      ss += r * r;
      r_sum += r;
    }
    const double sum_sq = ss.value();
    LikelihoodTerms out;
    out.log_kernel = -n * s - 0.5 * w * sum_sq;
    if (want != Derivatives::kNone) out.gradient = Eigen::Vector2d(w * r_sum, -n + w * sum_sq);
    if (want == Derivatives::kHessian) {
      Eigen::Matrix2d h;
      h << -n * w, -2.0 * w * r_sum, -2.0 * w * r_sum, -2.0 * w * sum_sq;
      out.hessian = h;
    }
    return out;
  }
};

// Poisson counts with rate baseline * exp(theta).
class PoissonLogRate final : public Model {
 public:
  explicit PoissonLogRate(double baseline) : baseline_(baseline), log_baseline_(std::log(baseline)) {
    if (!(baseline > 0.0) || !std::isfinite(baseline)) {
      throw InputError("poisson_lograte: baseline must be positive and finite");
    }
  }

  std::string name() const override { return "poisson_lograte"; }
  std::size_t dim() const override { return 1; }
  std::size_t observation_dim() const override { return 1; }

  bool in_domain(const ParameterVector& theta) const override {
    if (theta.size() != 1) return false;
    const double rate = rate_at(theta[0]);
    return std::isfinite(rate) && rate > 0.0;
  }

  void validate(ObservationView x) const override {
    if (x.size() != 1) throw InputError("poisson_lograte: observations are scalar counts");
    const double v = x[0];
    if (!std::isfinite(v) || v < 0.0 || v != std::floor(v)) {
      throw InputError("poisson_lograte: observation " + std::to_string(v) +
                       " is not a nonnegative integer count");
    }
  }

  double log_density(ObservationView x, const ParameterVector& theta) const override {
    return x[0] * theta[0] - rate_at(theta[0]) + log_base(x);
  }

  Eigen::VectorXd gradient(ObservationView x, const ParameterVector& theta) const override {
    return Eigen::VectorXd::Constant(1, x[0] - rate_at(theta[0]));
  }

  Eigen::MatrixXd hessian(ObservationView /*x*/, const ParameterVector& theta) const override {
    return Eigen::MatrixXd::Constant(1, 1, -rate_at(theta[0]));
  }

  double log_base(ObservationView x) const override {
    return x[0] * log_baseline_ - std::lgamma(x[0] + 1.0);
  }

  std::optional<Eigen::MatrixXd> analytic_fisher(const ParameterVector& theta) const override {
    return Eigen::MatrixXd::Constant(1, 1, rate_at(theta[0]));
  }

  Sample sample(const ParameterVector& theta, std::size_t count, Stream& rng) const override {
    boost::random::poisson_distribution<long long, double> poisson(rate_at(theta[0]));
    std::vector<double> values(count);
    for (auto& v : values) v = static_cast<double>(poisson(rng));
    return Sample(1, std::move(values));
  }

  ParameterVector moment_estimate(const Sample& data) const override {
    if (data.empty()) return ParameterVector::zeros(1);
    double mean = 0.0;
    for (double x : data.values()) mean += x;
    mean /= static_cast<double>(data.size());
    return ParameterVector{mean > 0.0 ? std::log(mean / baseline_) : 0.0};
  }

  LikelihoodTerms accumulate(const Sample& data, const ParameterVector& theta,
                             Derivatives want) const override {
    double total = 0.0;
    for (double x : data.values()) total += x;
    const double n = static_cast<double>(data.size());
    const double rate = rate_at(theta[0]);
    LikelihoodTerms out;
    out.log_kernel = theta[0] * total - n * rate;
    if (want != Derivatives::kNone) out.gradient = Eigen::VectorXd::Constant(1, total - n * rate);
    if (want == Derivatives::kHessian) out.hessian = Eigen::MatrixXd::Constant(1, 1, -n * rate);
    return out;
  }

  std::vector<std::pair<std::string, std::vector<double>>> describe() const override {
    return {{"baseline", {baseline_}}};
  }

 private:
  double rate_at(double theta) const { return baseline_ * std::exp(theta); }

  double baseline_;
  double log_baseline_;
};

}  // namespace

std::shared_ptr<const Model> make_gaussian_mean(const Eigen::MatrixXd& covariance) {
  return std::make_shared<GaussianMean>(covariance);
}

std::shared_ptr<const Model> make_gaussian_mean_logsd() {
  return std::make_shared<GaussianMeanLogSd>();
}

std::shared_ptr<const Model> make_poisson_lograte(double baseline) {
  return std::make_shared<PoissonLogRate>(baseline);
}

}  // namespace lrvec

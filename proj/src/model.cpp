#include "lrvec/model.hpp"

#include <algorithm>
#include <string>

#include "lrvec/errors.hpp"
#include "lrvec/summation.hpp"

namespace lrvec {

ParameterVector::ParameterVector(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  if (coords_.size() < 1) {
    throw InputError("parameter vector must have at least one coordinate");
  }
  if (!coords_.allFinite()) {
    throw InputError("parameter vector has a non-finite coordinate");
  }
}

ParameterVector::ParameterVector(std::initializer_list<double> coords)
    : ParameterVector(Eigen::Map<const Eigen::VectorXd>(coords.begin(),
                                                        static_cast<Eigen::Index>(coords.size()))) {}

ParameterVector ParameterVector::zeros(std::size_t d) {
  return ParameterVector(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)));
}

Sample::Sample(std::size_t dim, std::vector<double> values) : dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw InputError("observation dimension must be positive");
  if (values_.size() % dim_ != 0) {
    throw InputError("sample length " + std::to_string(values_.size()) +
                     " is not a multiple of the observation dimension " + std::to_string(dim_));
  }
}

void Sample::push_back(ObservationView x) {
  if (x.size() != dim_) throw InputError("observation has the wrong dimension");
  values_.insert(values_.end(), x.begin(), x.end());
}

void Sample::append(const Sample& other) {
  if (other.dim_ != dim_) throw InputError("cannot append samples of different dimension");
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
}

double Model::log_base(ObservationView /*x*/) const { return 0.0; }

std::optional<Eigen::MatrixXd> Model::analytic_fisher(const ParameterVector& /*theta*/) const {
  return std::nullopt;
}

ParameterVector Model::moment_estimate(const Sample& /*data*/) const {
  return ParameterVector::zeros(dim());
}

LikelihoodTerms Model::accumulate(const Sample& data, const ParameterVector& theta,
                                  Derivatives want) const {
  const auto d = static_cast<Eigen::Index>(dim());
  LikelihoodTerms out;
  CompensatedSum kernel;
  if (want != Derivatives::kNone) out.gradient = Eigen::VectorXd::Zero(d);
  if (want == Derivatives::kHessian) out.hessian = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto x = data[j];
    kernel += log_density(x, theta) - log_base(x);
    if (want != Derivatives::kNone) out.gradient += gradient(x, theta);
    if (want == Derivatives::kHessian) out.hessian += hessian(x, theta);
  }
  out.log_kernel = kernel.value();
  return out;
}

double Model::log_base_sum(const Sample& data) const {
  CompensatedSum sum;
  for (std::size_t j = 0; j < data.size(); ++j) sum += log_base(data[j]);
  return sum.value();
}

void Model::validate_sample(const Sample& data) const {
  if (data.dim() != observation_dim()) {
    throw InputError(name() + ": observations must have " + std::to_string(observation_dim()) +
                     " value(s), got " + std::to_string(data.dim()));
  }
  for (std::size_t j = 0; j < data.size(); ++j) validate(data[j]);
}

namespace {

void require_domain(const Model& model, const ParameterVector& theta) {
  if (theta.size() != model.dim()) {
    throw InputError(model.name() + ": parameter has dimension " + std::to_string(theta.size()) +
                     ", expected " + std::to_string(model.dim()));
  }
  if (!model.in_domain(theta)) {
    throw DomainError(model.name() + ": parameter outside the parameter space");
  }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

double log_likelihood(const Model& model, const ParameterVector& theta, const Sample& data) {
  require_domain(model, theta);
  if (data.empty()) throw InputError("log_likelihood: empty data");
  model.validate_sample(data);
  return model.accumulate(data, theta, Derivatives::kNone).log_kernel + model.log_base_sum(data);
}

MonteCarloFisher monte_carlo_fisher(const Model& model, const ParameterVector& theta,
                                    std::size_t samples, std::uint64_t seed) {
  require_domain(model, theta);
  if (samples < 2) throw InputError("monte_carlo_fisher: need at least two samples");
  auto rng = substream(seed, StreamPurpose::kFisher, 0);
  const Sample draws = model.sample(theta, samples, rng);
  const auto d = static_cast<Eigen::Index>(model.dim());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t j = 0; j < draws.size(); ++j) {
    const Eigen::MatrixXd h = -model.hessian(draws[j], theta);
    sum += h;
    sum_sq += h.cwiseProduct(h);
  }
  const double n = static_cast<double>(samples);
  MonteCarloFisher out;
  out.mean = sum / n;
  const Eigen::MatrixXd var = ((sum_sq / n) - out.mean.cwiseProduct(out.mean)) * (n / (n - 1.0));
  out.standard_error = (var.cwiseMax(0.0) / n).cwiseSqrt();
  return out;
}

namespace {

Eigen::MatrixXd unchecked_fisher(const Model& model, const ParameterVector& theta,
                                 const FisherOptions& options) {
  if (auto analytic = model.analytic_fisher(theta)) return symmetrized(*analytic);
  return symmetrized(monte_carlo_fisher(model, theta, options.samples, options.seed).mean);
}

}  // namespace

Eigen::MatrixXd fisher_information(const Model& model, const ParameterVector& theta,
                                   const FisherOptions& options) {
  require_domain(model, theta);
  const Eigen::MatrixXd info = unchecked_fisher(model, theta, options);
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(model.name() + ": Fisher information is not positive definite");
  }
  return info;
}

RegularityReport check_regularity(const Model& model, const ParameterVector& theta,
                                  const Sample& probes) {
  require_domain(model, theta);
  if (probes.empty()) throw InputError("check_regularity: no probe observations");
  model.validate_sample(probes);

  const auto d = static_cast<Eigen::Index>(model.dim());
  RegularityReport report;
  for (std::size_t j = 0; j < probes.size(); ++j) {
    const auto x = probes[j];
    const Eigen::VectorXd grad = model.gradient(x, theta);
    const Eigen::MatrixXd hess = model.hessian(x, theta);
    for (Eigen::Index k = 0; k < d; ++k) {
      const double h = fd_step(theta.coords()(k));
      Eigen::VectorXd plus = theta.coords();
      Eigen::VectorXd minus = theta.coords();
      plus(k) += h;
      minus(k) -= h;
      const ParameterVector tp(plus);
      const ParameterVector tm(minus);
      const double fd = (model.log_density(x, tp) - model.log_density(x, tm)) / (2.0 * h);
      report.gradient_error =
          std::max(report.gradient_error, std::abs(grad(k) - fd) / (1.0 + std::abs(grad(k))));
      const Eigen::VectorXd fd_col = (model.gradient(x, tp) - model.gradient(x, tm)) / (2.0 * h);
      for (Eigen::Index i = 0; i < d; ++i) {
        report.hessian_error = std::max(
            report.hessian_error, std::abs(hess(i, k) - fd_col(i)) / (1.0 + std::abs(hess(i, k))));
      }
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(unchecked_fisher(model, theta, {}),
                                                           Eigen::EigenvaluesOnly);
  report.min_fisher_eigenvalue = eig.eigenvalues().minCoeff();
  return report;
}

}  // namespace lrvec

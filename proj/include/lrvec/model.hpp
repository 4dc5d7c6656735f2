#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lrvec/rng.hpp"

namespace lrvec {

/// A point in the parameter space, a subset of R^d with d >= 1. Coordinates are
/// always finite.
class ParameterVector {
 public:
  explicit ParameterVector(Eigen::VectorXd coords);
  ParameterVector(std::initializer_list<double> coords);

  static ParameterVector zeros(std::size_t d);

  std::size_t size() const { return static_cast<std::size_t>(coords_.size()); }
  double operator[](std::size_t k) const { return coords_(static_cast<Eigen::Index>(k)); }
  const Eigen::VectorXd& coords() const { return coords_; }

  friend bool operator==(const ParameterVector& a, const ParameterVector& b) {
    return a.coords_ == b.coords_;
  }

 private:
  Eigen::VectorXd coords_;
};

using ObservationView = std::span<const double>;

/// Observations of one population held as a flat row-major array, `dim` values
/// per observation. Count data is stored as integral doubles.
class Sample {
 public:
  explicit Sample(std::size_t dim) : dim_(dim) {}
  Sample(std::size_t dim, std::vector<double> values);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  bool empty() const { return values_.empty(); }

  ObservationView operator[](std::size_t j) const {
    return ObservationView(values_.data() + j * dim_, dim_);
  }
  const std::vector<double>& values() const { return values_; }

  void reserve(std::size_t count) { values_.reserve(count * dim_); }
  void push_back(ObservationView x);
  void append(const Sample& other);

  friend bool operator==(const Sample& a, const Sample& b) {
    return a.dim_ == b.dim_ && a.values_ == b.values_;
  }

 private:
  std::size_t dim_;
  std::vector<double> values_;
};

/// Which derivative orders `Model::accumulate` must fill in.
enum class Derivatives { kNone, kGradient, kHessian };

/// Sums over a sample of the theta-dependent part of the log-density and of its
/// derivatives. Unrequested derivative fields are left empty.
struct LikelihoodTerms {
  double log_kernel = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// A parametric family f(x | theta) on an open parameter space.
///
/// The log-density splits as log f(x|theta) = kernel(x, theta) + base(x). Every
/// family must be twice continuously differentiable in theta, allow
/// differentiation under the integral, have a positive definite Fisher
/// information, and be identifiable. The local domination condition on second
/// derivatives (an integrable bound on |d2 log f| near each theta) is a contract
/// each family must satisfy analytically; nothing here checks it.
///
/// All methods are const and thread-safe; `sample` mutates only the stream it
/// is handed.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  /// Parameter dimension d.
  virtual std::size_t dim() const = 0;
  /// Number of values per observation.
  virtual std::size_t observation_dim() const = 0;

  /// Membership in the open parameter space. Always accepts the origin.
  virtual bool in_domain(const ParameterVector& theta) const = 0;
  /// Throws InputError if `x` is not a point of the sample space.
  virtual void validate(ObservationView x) const = 0;

  virtual double log_density(ObservationView x, const ParameterVector& theta) const = 0;
  virtual Eigen::VectorXd gradient(ObservationView x, const ParameterVector& theta) const = 0;
  virtual Eigen::MatrixXd hessian(ObservationView x, const ParameterVector& theta) const = 0;

  /// Theta-free part of the log-density.
  virtual double log_base(ObservationView x) const;

  /// Closed-form Fisher information, when the family has one.
  virtual std::optional<Eigen::MatrixXd> analytic_fisher(const ParameterVector& theta) const;

  virtual Sample sample(const ParameterVector& theta, std::size_t count, Stream& rng) const = 0;

  /// Method-of-moments starting point for the MLE. Defaults to the origin.
  virtual ParameterVector moment_estimate(const Sample& data) const;

  /// Kernel sum and derivatives over `data`. The default loops over the
  /// per-observation methods; families override it with tight loops.
  virtual LikelihoodTerms accumulate(const Sample& data, const ParameterVector& theta,
                                     Derivatives want) const;

  /// Sum of `log_base` over `data`.
  virtual double log_base_sum(const Sample& data) const;

  /// Model parameters for reports, e.g. {"baseline": 3}.
  virtual std::vector<std::pair<std::string, std::vector<double>>> describe() const { return {}; }

  /// Validates every observation and the observation width.
  void validate_sample(const Sample& data) const;
};

/// Sum of log f(x_j | theta). Throws DomainError outside the parameter space
/// and InputError on empty or invalid data.
double log_likelihood(const Model& model, const ParameterVector& theta, const Sample& data);

struct FisherOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 0x5eedf15e;
};

/// Analytic Fisher information when available, otherwise the Monte Carlo
/// estimate -(1/N) sum hessian(X_i, theta) with X_i drawn at theta. The result is
/// symmetrized; NumericalError if it is not positive definite.
Eigen::MatrixXd fisher_information(const Model& model, const ParameterVector& theta,
                                   const FisherOptions& options = {});

struct MonteCarloFisher {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd standard_error;
};

/// Monte Carlo Fisher estimate with entrywise standard errors.
MonteCarloFisher monte_carlo_fisher(const Model& model, const ParameterVector& theta,
                                    std::size_t samples, std::uint64_t seed);

struct RegularityReport {
  /// max |grad - FD(log_density)| / (1 + |grad|)
  double gradient_error = 0.0;
  /// max |hessian - FD(grad)| / (1 + |hessian|)
  double hessian_error = 0.0;
  double min_fisher_eigenvalue = 0.0;
};

/// Finite-difference step for coordinate value t.
inline double fd_step(double t) { return 1e-5 * (1.0 + std::abs(t)); }

/// Compares the analytic derivatives against central finite differences at
/// every probe observation and reports the smallest Fisher eigenvalue.
RegularityReport check_regularity(const Model& model, const ParameterVector& theta,
                                  const Sample& probes);

// Builtin families.

/// d-dimensional Gaussian with unknown mean theta and known SPD covariance.
std::shared_ptr<const Model> make_gaussian_mean(const Eigen::MatrixXd& covariance);

/// Scalar Gaussian N(mu, exp(2 s)) with theta = (mu, s).
std::shared_ptr<const Model> make_gaussian_mean_logsd();

/// Poisson counts with rate baseline * exp(theta), d = 1.
std::shared_ptr<const Model> make_poisson_lograte(double baseline);

}  // namespace lrvec

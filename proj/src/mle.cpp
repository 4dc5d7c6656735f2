#include "lrvec/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lrvec/errors.hpp"

namespace lrvec {

HypothesisSpec::HypothesisSpec(std::size_t r) : r_(r) {
  if (r_ < 1) throw InputError("hypothesis must constrain at least one coordinate (r >= 1)");
}

void HypothesisSpec::check_against(const Model& model) const {
  if (r_ > model.dim()) {
    throw InputError("hypothesis constrains r = " + std::to_string(r_) + " coordinates but " +
                     model.name() + " has d = " + std::to_string(model.dim()));
  }
}

bool HypothesisSpec::contains(const ParameterVector& theta) const {
  if (theta.size() < r_) return false;
  for (std::size_t k = 0; k < r_; ++k) {
    if (theta[k] != 0.0) return false;
  }
  return true;
}

namespace {

constexpr int kMaxHalvings = 60;
constexpr double kStepTol = 1e-6;

void check_inputs(const Model& model, const Sample& data, const ParameterVector& init) {
  if (data.empty()) throw InputError("cannot fit an empty sample");
  model.validate_sample(data);
  if (init.size() != model.dim()) {
    throw InputError("initial point has dimension " + std::to_string(init.size()) + ", expected " +
                     std::to_string(model.dim()));
  }
  if (!model.in_domain(init)) throw DomainError(model.name() + ": initial point outside the domain");
}

// Damped Newton on coordinates [first, d); the leading coordinates stay fixed.
FitResult newton_ascent(const Model& model, const Sample& data, Eigen::VectorXd theta,
                        Eigen::Index first, const SolverOptions& options) {
  const Eigen::Index free = theta.size() - first;
  const double tol = options.tol * (1.0 + static_cast<double>(data.size()));
  const double base = model.log_base_sum(data);

  LikelihoodTerms terms = model.accumulate(data, ParameterVector(theta), Derivatives::kHessian);
  int iterations = 0;
  bool converged = false;
  double grad_norm = std::numeric_limits<double>::infinity();

  while (true) {
    const Eigen::VectorXd g = terms.gradient.tail(free);
    grad_norm = g.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(grad_norm) || !std::isfinite(terms.log_kernel)) break;

    const Eigen::MatrixXd neg_h = -terms.hessian.bottomRightCorner(free, free);
    Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
    const bool newton = llt.info() == Eigen::Success;
    Eigen::VectorXd step;
    if (newton) {
      step = llt.solve(g);
    } else {
      step = g / std::max(1.0, grad_norm);
    }

    // A small gradient alone is not enough: a supremum approached at the edge
    // of the domain also flattens the gradient, but keeps the Newton step long.
    if (grad_norm == 0.0 ||
        (grad_norm <= tol && newton &&
         step.lpNorm<Eigen::Infinity>() <= kStepTol * (1.0 + theta.lpNorm<Eigen::Infinity>()))) {
      converged = true;
      break;
    }
    if (iterations >= options.max_iter) break;
    ++iterations;

    const double slack = 1e-12 * (1.0 + std::abs(terms.log_kernel));
    bool accepted = false;
    double t = 1.0;
    for (int h = 0; h < kMaxHalvings && !accepted; ++h, t *= 0.5) {
      Eigen::VectorXd candidate = theta;
      candidate.tail(free) += t * step;
      if (!candidate.allFinite()) continue;
      const ParameterVector point(candidate);
      if (!model.in_domain(point)) continue;
      LikelihoodTerms trial = model.accumulate(data, point, Derivatives::kHessian);
      if (std::isfinite(trial.log_kernel) && trial.log_kernel >= terms.log_kernel - slack) {
        theta = std::move(candidate);
        terms = std::move(trial);
        accepted = true;
      }
    }
    if (!accepted) break;
  }

  return FitResult{ParameterVector(theta), terms.log_kernel + base, converged, iterations,
                   grad_norm};
}

}  // namespace

FitResult fit_unconstrained(const Model& model, const Sample& data, const ParameterVector& init,
                            const SolverOptions& options) {
  check_inputs(model, data, init);
  return newton_ascent(model, data, init.coords(), 0, options);
}

FitResult fit_unconstrained(const Model& model, const Sample& data, const SolverOptions& options) {
  return fit_unconstrained(model, data, ParameterVector::zeros(model.dim()), options);
}

FitResult fit_constrained(const Model& model, const Sample& data, const HypothesisSpec& hyp,
                          const ParameterVector& init, const SolverOptions& options) {
  hyp.check_against(model);
  check_inputs(model, data, init);
  if (!hyp.contains(init)) {
    throw InputError("initial point for the constrained fit must have its first r coordinates zero");
  }
  const auto r = static_cast<Eigen::Index>(hyp.r());
  if (hyp.r() == model.dim()) {
    const ParameterVector origin = ParameterVector::zeros(model.dim());
    const double ll =
        model.accumulate(data, origin, Derivatives::kNone).log_kernel + model.log_base_sum(data);
    return FitResult{origin, ll, true, 0, 0.0};
  }
  return newton_ascent(model, data, init.coords(), r, options);
}

FitResult fit_constrained(const Model& model, const Sample& data, const HypothesisSpec& hyp,
                          const SolverOptions& options) {
  return fit_constrained(model, data, hyp, ParameterVector::zeros(model.dim()), options);
}

}  // namespace lrvec

#pragma once

#include <cstddef>

#include "lrvec/model.hpp"

namespace lrvec {

/// Null hypothesis theta_1 = ... = theta_r = 0 on the leading r coordinates.
class HypothesisSpec {
 public:
  explicit HypothesisSpec(std::size_t r);

  std::size_t r() const { return r_; }

  /// Throws InputError unless 1 <= r <= d.
  void check_against(const Model& model) const;

  /// True when the first r coordinates of theta are exactly zero.
  bool contains(const ParameterVector& theta) const;

 private:
  std::size_t r_;
};

struct SolverOptions {
  /// Convergence when the sup-norm of the gradient is at most tol * (1 + n)
  /// and the Newton step is below 1e-6 * (1 + |theta|_inf).
  double tol = 1e-8;
  int max_iter = 100;
};

struct FitResult {
  ParameterVector theta_hat;
  double log_lik = 0.0;
  bool converged = false;
  int iterations = 0;
  /// Sup-norm of the gradient over the free coordinates at theta_hat.
  double grad_norm = 0.0;
};

/// Maximizes the log-likelihood over the whole parameter space by damped
/// Newton iteration. Each step is halved until the log-likelihood does not
/// decrease and the iterate stays in the domain; when the Hessian is not
/// negative definite the step falls back to gradient ascent. Non-convergence is
/// reported through `converged`, never thrown.
FitResult fit_unconstrained(const Model& model, const Sample& data, const ParameterVector& init,
                            const SolverOptions& options = {});
FitResult fit_unconstrained(const Model& model, const Sample& data,
                            const SolverOptions& options = {});

/// Maximizes over the null subspace: the first r coordinates are held at zero
/// and Newton runs on the trailing d - r. With r = d the origin is returned
/// without iterating. `init` must have its first r coordinates equal to zero.
FitResult fit_constrained(const Model& model, const Sample& data, const HypothesisSpec& hyp,
                          const ParameterVector& init, const SolverOptions& options = {});
FitResult fit_constrained(const Model& model, const Sample& data, const HypothesisSpec& hyp,
                          const SolverOptions& options = {});

}  // namespace lrvec

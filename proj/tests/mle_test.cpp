#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "lrvec/errors.hpp"
#include "lrvec/mle.hpp"

using namespace lrvec;

namespace {

Sample scalars(std::vector<double> values) { return Sample(1, std::move(values)); }

double mean_of(const Sample& s) {
  return std::accumulate(s.values().begin(), s.values().end(), 0.0) /
         static_cast<double>(s.size());
}

}  // namespace

TEST(HypothesisTest, Validation) {
  EXPECT_THROW(HypothesisSpec(0), InputError);
  auto model = make_gaussian_mean_logsd();
  EXPECT_NO_THROW(HypothesisSpec(2).check_against(*model));
  EXPECT_THROW(HypothesisSpec(3).check_against(*model), InputError);
  EXPECT_TRUE(HypothesisSpec(1).contains(ParameterVector{0.0, 4.0}));
  EXPECT_FALSE(HypothesisSpec(2).contains(ParameterVector{0.0, 4.0}));
}

TEST(FitTest, GaussianMeanIsSampleMean) {
  auto model = make_gaussian_mean(Eigen::MatrixXd::Identity(1, 1));
  const auto fit = fit_unconstrained(*model, scalars({1.0, 2.0, 3.0}));
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.theta_hat[0], 2.0, 1e-12);
}

TEST(FitTest, LogSdAtSymmetricSample) {
  auto model = make_gaussian_mean_logsd();
  // mu = 0, sigma^2 = 1 so s = 0.
  const auto fit = fit_unconstrained(*model, scalars({-1.0, 1.0}));
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.theta_hat[0], 0.0, 1e-10);
  EXPECT_NEAR(fit.theta_hat[1], 0.0, 1e-10);
}

TEST(FitTest, PoissonAtBaselineRate) {
  auto model = make_poisson_lograte(2.0);
  const auto fit = fit_unconstrained(*model, scalars({2.0, 2.0, 2.0}));
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.theta_hat[0], 0.0, 1e-12);
}

TEST(FitTest, ConstrainedFullDimensionIsOrigin) {
  auto model = make_gaussian_mean(Eigen::MatrixXd::Identity(1, 1));
  const Sample data = scalars({0.5, 1.5});
  const auto fit = fit_constrained(*model, data, HypothesisSpec(1));
  EXPECT_TRUE(fit.converged);
  EXPECT_EQ(fit.iterations, 0);
  EXPECT_EQ(fit.theta_hat, ParameterVector{0.0});
  EXPECT_DOUBLE_EQ(fit.log_lik, log_likelihood(*model, ParameterVector{0.0}, data));
}

TEST(FitTest, ConstrainedLogSdEstimatesScaleAboutZero) {
  auto model = make_gaussian_mean_logsd();
  // With mu = 0 the MLE of sigma^2 is mean(x^2) = 5.
  const auto fit = fit_constrained(*model, scalars({-1.0, 3.0}), HypothesisSpec(1));
  EXPECT_TRUE(fit.converged);
  EXPECT_EQ(fit.theta_hat[0], 0.0);
  EXPECT_NEAR(fit.theta_hat[1], 0.5 * std::log(5.0), 1e-10);
}

TEST(FitTest, ConstrainedBivariateGaussianKeepsFreeCoordinate) {
  auto model = make_gaussian_mean(Eigen::MatrixXd::Identity(2, 2));
  const auto fit =
      fit_constrained(*model, Sample(2, {1.0, 1.0, 3.0, 3.0}), HypothesisSpec(1));
  EXPECT_TRUE(fit.converged);
  EXPECT_EQ(fit.theta_hat[0], 0.0);
  EXPECT_NEAR(fit.theta_hat[1], 2.0, 1e-12);
}

TEST(FitTest, ConstrainedInitOutsideNullIsInputError) {
  auto model = make_gaussian_mean_logsd();
  EXPECT_THROW(fit_constrained(*model, scalars({1.0, 2.0}), HypothesisSpec(1),
                               ParameterVector{0.5, 0.0}),
               InputError);
}

TEST(FitTest, EmptySampleIsInputError) {
  auto model = make_gaussian_mean_logsd();
  EXPECT_THROW(fit_unconstrained(*model, Sample(1)), InputError);
}

TEST(FitTest, AllZeroPoissonCountsDoNotConverge) {
  // The likelihood increases without bound as theta -> -infinity.
  auto model = make_poisson_lograte(1.0);
  const auto fit = fit_unconstrained(*model, scalars({0.0, 0.0, 0.0}));
  EXPECT_FALSE(fit.converged);
}

TEST(FitTest, ConstrainedNeverExceedsUnconstrained) {
  struct Case {
    std::shared_ptr<const Model> model;
    ParameterVector theta;
    std::size_t r;
  };
  const std::vector<Case> cases = {
      {make_gaussian_mean(Eigen::MatrixXd::Identity(1, 1)), ParameterVector{0.4}, 1},
      {make_gaussian_mean(Eigen::MatrixXd::Identity(2, 2)), ParameterVector{0.3, -0.2}, 1},
      {make_gaussian_mean(Eigen::MatrixXd::Identity(2, 2)), ParameterVector{0.3, -0.2}, 2},
      {make_gaussian_mean_logsd(), ParameterVector{0.2, 0.5}, 1},
      {make_gaussian_mean_logsd(), ParameterVector{0.0, -0.3}, 2},
      {make_poisson_lograte(4.0), ParameterVector{0.1}, 1},
  };
  for (const auto& c : cases) {
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      Stream rng = substream(rep, StreamPurpose::kAuxiliary, 0);
      const Sample data = c.model->sample(c.theta, 25, rng);
      const auto full = fit_unconstrained(*c.model, data);
      const auto null = fit_constrained(*c.model, data, HypothesisSpec(c.r));
      ASSERT_TRUE(full.converged);
      ASSERT_TRUE(null.converged);
      EXPECT_LE(null.log_lik, full.log_lik + 1e-10 * (1.0 + std::abs(full.log_lik)));
    }
  }
}

TEST(FitTest, GaussianMeanMatchesSampleMeanOnRandomData) {
  auto model = make_gaussian_mean(Eigen::MatrixXd::Constant(1, 1, 2.5));
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    Stream rng = substream(rep, StreamPurpose::kAuxiliary, 1);
    const Sample data = model->sample(ParameterVector{-1.0 + 0.05 * rep}, 1 + rep * 7, rng);
    const auto fit = fit_unconstrained(*model, data);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.theta_hat[0], mean_of(data), 1e-8 * (1.0 + std::abs(mean_of(data))));
  }
}

TEST(FitTest, ResultDoesNotDependOnStartingPoint) {
  auto model = make_gaussian_mean_logsd();
  Stream rng = substream(5, StreamPurpose::kAuxiliary, 2);
  const Sample data = model->sample(ParameterVector{1.0, -0.5}, 200, rng);
  const auto reference = fit_unconstrained(*model, data);
  ASSERT_TRUE(reference.converged);
  for (const auto& init : {ParameterVector{0.0, 0.0}, ParameterVector{3.0, 1.0},
                           ParameterVector{-2.0, -1.0}, ParameterVector{1.0, 2.0}}) {
    const auto fit = fit_unconstrained(*model, data, init);
    ASSERT_TRUE(fit.converged);
    EXPECT_LE((fit.theta_hat.coords() - reference.theta_hat.coords()).cwiseAbs().maxCoeff(), 1e-6);
  }

  auto poisson = make_poisson_lograte(0.5);
  Stream prng = substream(5, StreamPurpose::kAuxiliary, 3);
  const Sample counts = poisson->sample(ParameterVector{0.7}, 100, prng);
  const auto p0 = fit_unconstrained(*poisson, counts);
  for (double start : {-3.0, 0.0, 4.0}) {
    const auto fit = fit_unconstrained(*poisson, counts, ParameterVector{start});
    ASSERT_TRUE(fit.converged);
    EXPECT_NEAR(fit.theta_hat[0], p0.theta_hat[0], 1e-6);
  }
}

TEST(FitTest, EstimatorIsConsistent) {
  auto model = make_gaussian_mean_logsd();
  const ParameterVector truth{0.5, 0.3};
  auto median_error = [&](std::size_t n) {
    std::vector<double> errors;
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
      Stream rng = substream(rep, StreamPurpose::kAuxiliary, 100 + n);
      const auto fit = fit_unconstrained(*model, model->sample(truth, n, rng));
      errors.push_back((fit.theta_hat.coords() - truth.coords()).norm());
    }
    std::nth_element(errors.begin(), errors.begin() + 25, errors.end());
    return errors[25];
  };
  EXPECT_LT(median_error(10000), median_error(100));
}

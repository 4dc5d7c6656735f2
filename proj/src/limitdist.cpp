#include "lrvec/limitdist.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/normal_distribution.hpp>

#include "lrvec/errors.hpp"
#include "lrvec/parallel.hpp"

namespace lrvec {

namespace {

constexpr double kShapeTol = 1e-12;
constexpr double kEigenFloor = 1e-12;
constexpr double kMaxPerturbation = 1e-8;
constexpr double kPivotFloor = 1e-10;
constexpr std::size_t kBlock = 4096;

void check_correlation_shape(const CorrelationMatrix& rho) {
  if (rho.rows() < 1 || rho.rows() != rho.cols()) {
    throw InputError("correlation matrix must be square and non-empty");
  }
  if (!rho.allFinite()) throw InputError("correlation matrix has non-finite entries");
  if ((rho - rho.transpose()).cwiseAbs().maxCoeff() > kShapeTol) {
    throw InputError("correlation matrix is not symmetric");
  }
  if ((rho.diagonal().array() - 1.0).abs().maxCoeff() > kShapeTol) {
    throw InputError("correlation matrix must have a unit diagonal");
  }
}

// Cholesky that sets a column to zero when its pivot falls below the floor.
Eigen::MatrixXd semidefinite_cholesky(const Eigen::MatrixXd& a) {
  const auto m = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (pivot <= kPivotFloor) continue;
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < m; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
  return l;
}

// One draw of Q into `out` (length M), consuming normals from `rng`.
void draw_q(const Eigen::MatrixXd& factor, int r, Stream& rng, double* out, double* z) {
  const auto m = factor.rows();
  boost::random::normal_distribution<double> normal;
  std::fill(out, out + m, 0.0);
  for (int h = 0; h < r; ++h) {
    for (Eigen::Index k = 0; k < m; ++k) z[k] = normal(rng);
    for (Eigen::Index i = 0; i < m; ++i) {
      double xi = 0.0;
      for (Eigen::Index k = 0; k <= i; ++k) xi += factor(i, k) * z[k];
      out[i] += xi * xi;
    }
  }
}

}  // namespace

LimitLaw::LimitLaw(int r, CorrelationMatrix correlation) : r_(r), correlation_(std::move(correlation)) {
  if (r_ < 1) throw InputError("limit law needs r >= 1");
  check_correlation_shape(correlation_);
}

Eigen::MatrixXd psd_repair_cholesky(const CorrelationMatrix& correlation) {
  check_correlation_shape(correlation);
  Eigen::LLT<Eigen::MatrixXd> llt(correlation);
  if (llt.info() == Eigen::Success) {
    Eigen::MatrixXd l = llt.matrixL();
    if (l.diagonal().array().square().minCoeff() >= kEigenFloor) return l;
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(correlation);
  if (eig.info() != Eigen::Success) throw FactorizationError("eigen-decomposition failed");
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(kEigenFloor);
  Eigen::MatrixXd repaired = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::VectorXd scale = repaired.diagonal().cwiseSqrt().cwiseInverse();
  repaired = scale.asDiagonal() * repaired * scale.asDiagonal();
  repaired = 0.5 * (repaired + repaired.transpose()).eval();
  repaired.diagonal().setOnes();

  const double shift = (repaired - correlation).cwiseAbs().maxCoeff();
  if (shift > kMaxPerturbation) {
    throw FactorizationError("correlation matrix needs a repair of " + std::to_string(shift) +
                             ", beyond the 1e-8 allowance");
  }
  Eigen::MatrixXd l = semidefinite_cholesky(repaired);
  const double residual = (l * l.transpose() - correlation).cwiseAbs().maxCoeff();
  if (residual > kMaxPerturbation) {
    throw FactorizationError("repaired factor misses the correlation matrix by " +
                             std::to_string(residual));
  }
  return l;
}

LimitSampleBatch sample_limit_law(const LimitLaw& law, std::size_t count, std::uint64_t seed,
                                  std::size_t threads) {
  if (count < 1) throw InputError("sample_limit_law: count must be at least 1");
  const Eigen::MatrixXd factor = psd_repair_cholesky(law.correlation());
  const auto m = static_cast<Eigen::Index>(law.windows());
  LimitSampleBatch batch{RowMatrix(static_cast<Eigen::Index>(count), m), seed};
  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  parallel_for(blocks, threads, [&](std::size_t b) {
    std::vector<double> z(static_cast<std::size_t>(m));
    const std::size_t end = std::min(count, (b + 1) * kBlock);
    for (std::size_t k = b * kBlock; k < end; ++k) {
      Stream rng = substream(seed, StreamPurpose::kLimitLaw, k);
      draw_q(factor, law.r(), rng, batch.q.row(static_cast<Eigen::Index>(k)).data(), z.data());
    }
  });
  return batch;
}

ExceedanceEstimate joint_exceedance(const LimitLaw& law, const std::vector<double>& thresholds,
                                    std::size_t count, std::uint64_t seed, std::size_t threads) {
  if (count < 1000) throw InputError("joint_exceedance: count must be at least 1000");
  if (thresholds.size() != law.windows()) {
    throw InputError("joint_exceedance: expected " + std::to_string(law.windows()) +
                     " thresholds, got " + std::to_string(thresholds.size()));
  }
  for (double t : thresholds) {
    if (!(t >= 0.0)) throw InputError("joint_exceedance: thresholds must be nonnegative");
  }
  const Eigen::MatrixXd factor = psd_repair_cholesky(law.correlation());
  const std::size_t m = law.windows();
  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  std::vector<std::size_t> hits(blocks, 0);
  parallel_for(blocks, threads, [&](std::size_t b) {
    std::vector<double> q(m);
    std::vector<double> z(m);
    const std::size_t end = std::min(count, (b + 1) * kBlock);
    std::size_t local = 0;
    for (std::size_t k = b * kBlock; k < end; ++k) {
      Stream rng = substream(seed, StreamPurpose::kLimitLaw, k);
      draw_q(factor, law.r(), rng, q.data(), z.data());
      bool all = true;
      for (std::size_t i = 0; i < m && all; ++i) all = q[i] > thresholds[i];
      local += all ? 1 : 0;
    }
    hits[b] = local;
  });
  std::size_t total = 0;
  for (auto h : hits) total += h;
  const double n = static_cast<double>(count);
  const double p = static_cast<double>(total) / n;
  return ExceedanceEstimate{p, std::sqrt(p * (1.0 - p) / n), count, seed};
}

Eigen::MatrixXd theoretical_cov_q(const LimitLaw& law) {
  return 2.0 * law.r() * law.correlation().array().square().matrix();
}

}  // namespace lrvec

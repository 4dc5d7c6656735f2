#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "lrvec/simharness.hpp"

namespace lrvec::cli {

inline constexpr const char* kToolVersion = "1.0.0";

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

Json matrix_json(const Eigen::MatrixXd& m);
Json vector_json(const Eigen::VectorXd& v);

struct ManifestInputs {
  std::string command;
  Json resolved_config;
  /// (role, path) pairs; each is hashed.
  std::vector<std::pair<std::string, std::string>> files;
  std::uint64_t seed = 0;
};

Json manifest_json(const ManifestInputs& inputs);

Json fit_json(const FitResult& fit);
Json covariance_json(const CovarianceComparison& cmp);
Json exceedance_json(const ExceedanceEstimate& est);
Json study_report_json(const StudyReport& report, const AcceptanceThresholds& thresholds);

/// Serialized report text, newline-terminated.
std::string dump_report(const Json& report);

}  // namespace lrvec::cli

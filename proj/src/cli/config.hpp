#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrvec/mle.hpp"
#include "lrvec/model.hpp"
#include "lrvec/simharness.hpp"

namespace lrvec::cli {

using Json = nlohmann::ordered_json;

struct SimulateSection {
  std::size_t count = 100000;
  std::size_t bins = 50;
  bool write_samples = false;
  /// Also write the data of this study replicate, one CSV per population.
  std::optional<std::size_t> dataset_replicate;
};

struct RunConfig {
  std::shared_ptr<const Model> model;
  std::string model_name;
  Json model_params;
  std::size_t group_width = 1;
  std::optional<std::vector<std::uint64_t>> sizes;
  std::optional<std::size_t> r;
  std::size_t replicates = 1000;
  std::uint64_t seed = 1;
  std::optional<std::vector<double>> theta0;
  std::vector<double> threshold_levels = {0.9, 0.95};
  std::size_t limit_law_draws = 100000;
  AcceptanceThresholds acceptance;
  LrOptions lr;
  SimulateSection simulate;
  /// Data files in population order, resolved against the config directory.
  std::vector<std::string> data;
};

/// Parses and validates a config document. Relative data paths are resolved
/// against `base_dir`. Throws InputError on any problem.
RunConfig parse_config(const Json& doc, const std::filesystem::path& base_dir);

RunConfig load_config(const std::filesystem::path& path);

/// The config with every default filled in.
Json resolved_config(const RunConfig& config);

/// theta0 from the config, defaulting to the origin.
ParameterVector study_theta0(const RunConfig& config);

/// StudyConfig for simulate/verify. Requires scheme sizes.
StudyConfig study_config(const RunConfig& config, std::size_t threads);

}  // namespace lrvec::cli

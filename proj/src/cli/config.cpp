#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "lrvec/errors.hpp"

namespace lrvec::cli {

namespace {

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw InputError("unknown field '" + item.key() + "' in " + where);
    }
  }
}

std::string field(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

std::uint64_t get_uint(const Json& obj, const std::string& key, const std::string& where) {
  const Json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw InputError(field(where, key) + " must be a nonnegative integer");
}

double get_double(const Json& v, const std::string& name) {
  if (!v.is_number()) throw InputError(name + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InputError(name + " must be finite");
  return x;
}

std::vector<double> get_vector(const Json& v, const std::string& name) {
  if (!v.is_array()) throw InputError(name + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(get_double(v[k], name + "[" + std::to_string(k) + "]"));
  }
  return out;
}

Eigen::MatrixXd get_matrix(const Json& v, const std::string& name) {
  if (!v.is_array() || v.empty()) throw InputError(name + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row = get_vector(v[static_cast<std::size_t>(i)], name);
    if (static_cast<Eigen::Index>(row.size()) != rows) throw InputError(name + " must be square");
    for (Eigen::Index j = 0; j < rows; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

void parse_model(const Json& doc, RunConfig& config) {
  check_keys(doc, {"name", "params"}, "model");
  if (!doc.contains("name") || !doc["name"].is_string()) {
    throw InputError("model.name must be a string");
  }
  config.model_name = doc["name"].get<std::string>();
  const Json params = doc.value("params", Json::object());
  const std::string& name = config.model_name;
  if (name == "gaussian_mean") {
    check_keys(params, {"covariance", "dim"}, "model.params");
    Eigen::MatrixXd cov;
    if (params.contains("covariance")) {
      cov = get_matrix(params["covariance"], "model.params.covariance");
      if (params.contains("dim") &&
          get_uint(params, "dim", "model.params") != static_cast<std::uint64_t>(cov.rows())) {
        throw InputError("model.params.dim does not match the covariance");
      }
    } else {
      const auto d = params.contains("dim") ? get_uint(params, "dim", "model.params") : 1;
      if (d < 1) throw InputError("model.params.dim must be at least 1");
      cov = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    }
    config.model = make_gaussian_mean(cov);
    config.model_params = Json{{"covariance", matrix_to_json(cov)}};
  } else if (name == "gaussian_mean_logsd") {
    check_keys(params, {}, "model.params");
    config.model = make_gaussian_mean_logsd();
    config.model_params = Json::object();
  } else if (name == "poisson_lograte") {
    check_keys(params, {"baseline"}, "model.params");
    const double c =
        params.contains("baseline") ? get_double(params["baseline"], "model.params.baseline") : 1.0;
    config.model = make_poisson_lograte(c);
    config.model_params = Json{{"baseline", c}};
  } else {
    throw InputError("unknown model '" + name +
                     "' (expected gaussian_mean, gaussian_mean_logsd or poisson_lograte)");
  }
}

void parse_scheme(const Json& doc, RunConfig& config) {
  check_keys(doc, {"G", "n"}, "scheme");
  if (!doc.contains("G")) throw InputError("scheme.G is required");
  config.group_width = get_uint(doc, "G", "scheme");
  if (doc.contains("n")) {
    if (!doc["n"].is_array()) throw InputError("scheme.n must be an array of sample sizes");
    std::vector<std::uint64_t> sizes;
    for (std::size_t k = 0; k < doc["n"].size(); ++k) {
      Json wrap{{"n", doc["n"][k]}};
      sizes.push_back(get_uint(wrap, "n", "scheme"));
    }
    config.sizes = std::move(sizes);
    // Validates G against P and every n_p.
    GroupingScheme(config.group_width, *config.sizes);
  } else if (config.group_width < 1) {
    throw InputError("group width G must be at least 1");
  }
}

void parse_study(const Json& doc, RunConfig& config) {
  check_keys(doc,
             {"replicates", "seed", "theta0", "thresholds", "limit_law_draws", "acceptance"},
             "study");
  if (doc.contains("replicates")) config.replicates = get_uint(doc, "replicates", "study");
  if (doc.contains("seed")) config.seed = get_uint(doc, "seed", "study");
  if (doc.contains("theta0")) config.theta0 = get_vector(doc["theta0"], "study.theta0");
  if (doc.contains("thresholds")) {
    config.threshold_levels = get_vector(doc["thresholds"], "study.thresholds");
  }
  if (doc.contains("limit_law_draws")) {
    config.limit_law_draws = get_uint(doc, "limit_law_draws", "study");
  }
  if (doc.contains("acceptance")) {
    const Json& acc = doc["acceptance"];
    check_keys(acc, {"ks_alpha", "max_sigma"}, "study.acceptance");
    if (acc.contains("ks_alpha")) {
      config.acceptance.ks_alpha = get_double(acc["ks_alpha"], "study.acceptance.ks_alpha");
    }
    if (acc.contains("max_sigma")) {
      config.acceptance.max_sigma = get_double(acc["max_sigma"], "study.acceptance.max_sigma");
    }
    if (!(config.acceptance.ks_alpha > 0.0 && config.acceptance.ks_alpha < 1.0)) {
      throw InputError("study.acceptance.ks_alpha must lie in (0, 1)");
    }
    if (!(config.acceptance.max_sigma > 0.0)) {
      throw InputError("study.acceptance.max_sigma must be positive");
    }
  }
}

void parse_solver(const Json& doc, RunConfig& config) {
  check_keys(doc, {"tol", "max_iter", "warm_start"}, "solver");
  if (doc.contains("tol")) {
    config.lr.solver.tol = get_double(doc["tol"], "solver.tol");
    if (!(config.lr.solver.tol > 0.0)) throw InputError("solver.tol must be positive");
  }
  if (doc.contains("max_iter")) {
    const auto it = get_uint(doc, "max_iter", "solver");
    if (it < 1 || it > 100000) throw InputError("solver.max_iter must lie in [1, 100000]");
    config.lr.solver.max_iter = static_cast<int>(it);
  }
  if (doc.contains("warm_start")) {
    if (!doc["warm_start"].is_boolean()) throw InputError("solver.warm_start must be a boolean");
    config.lr.warm_start = doc["warm_start"].get<bool>();
  }
}

void parse_simulate(const Json& doc, RunConfig& config) {
  check_keys(doc, {"count", "bins", "write_samples", "dataset_replicate"}, "simulate");
  auto& sim = config.simulate;
  if (doc.contains("count")) sim.count = get_uint(doc, "count", "simulate");
  if (doc.contains("bins")) sim.bins = get_uint(doc, "bins", "simulate");
  if (doc.contains("write_samples")) {
    if (!doc["write_samples"].is_boolean()) {
      throw InputError("simulate.write_samples must be a boolean");
    }
    sim.write_samples = doc["write_samples"].get<bool>();
  }
  if (doc.contains("dataset_replicate")) {
    sim.dataset_replicate = get_uint(doc, "dataset_replicate", "simulate");
  }
  if (sim.count < 1) throw InputError("simulate.count must be at least 1");
  if (sim.bins < 1 || sim.bins > 100000) throw InputError("simulate.bins must lie in [1, 100000]");
}

}  // namespace

RunConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, {"model", "scheme", "hyp", "study", "solver", "simulate", "data"}, "config");
  RunConfig config;
  if (!doc.contains("model")) throw InputError("config.model is required");
  parse_model(doc["model"], config);
  if (!doc.contains("scheme")) throw InputError("config.scheme is required");
  parse_scheme(doc["scheme"], config);
  if (doc.contains("hyp")) {
    check_keys(doc["hyp"], {"r"}, "hyp");
    if (!doc["hyp"].contains("r")) throw InputError("hyp.r is required");
    config.r = get_uint(doc["hyp"], "r", "hyp");
    HypothesisSpec(*config.r).check_against(*config.model);
  }
  if (doc.contains("study")) parse_study(doc["study"], config);
  if (doc.contains("solver")) parse_solver(doc["solver"], config);
  if (doc.contains("simulate")) parse_simulate(doc["simulate"], config);
  if (doc.contains("data")) {
    if (!doc["data"].is_array()) throw InputError("config.data must be an array of paths");
    for (const auto& p : doc["data"]) {
      if (!p.is_string()) throw InputError("config.data entries must be strings");
      std::filesystem::path path(p.get<std::string>());
      if (path.is_relative()) path = base_dir / path;
      config.data.push_back(path.lexically_normal().string());
    }
  }
  if (config.theta0 && config.theta0->size() != config.model->dim()) {
    throw InputError("study.theta0 has " + std::to_string(config.theta0->size()) +
                     " coordinates, model expects " + std::to_string(config.model->dim()));
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw InputError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

Json resolved_config(const RunConfig& config) {
  Json doc;
  doc["model"] = Json{{"name", config.model_name}, {"params", config.model_params}};
  doc["scheme"]["G"] = config.group_width;
  if (config.sizes) doc["scheme"]["n"] = *config.sizes;
  if (config.r) doc["hyp"] = Json{{"r", *config.r}};
  Json study;
  study["replicates"] = config.replicates;
  study["seed"] = config.seed;
  const Eigen::VectorXd theta0 = study_theta0(config).coords();
  study["theta0"] = std::vector<double>(theta0.begin(), theta0.end());
  study["thresholds"] = config.threshold_levels;
  study["limit_law_draws"] = config.limit_law_draws;
  study["acceptance"] = Json{{"ks_alpha", config.acceptance.ks_alpha},
                             {"max_sigma", config.acceptance.max_sigma}};
  doc["study"] = std::move(study);
  doc["solver"] = Json{{"tol", config.lr.solver.tol},
                       {"max_iter", config.lr.solver.max_iter},
                       {"warm_start", config.lr.warm_start}};
  Json sim{{"count", config.simulate.count},
           {"bins", config.simulate.bins},
           {"write_samples", config.simulate.write_samples}};
  if (config.simulate.dataset_replicate) {
    sim["dataset_replicate"] = *config.simulate.dataset_replicate;
  }
  doc["simulate"] = std::move(sim);
  doc["data"] = config.data;
  return doc;
}

ParameterVector study_theta0(const RunConfig& config) {
  if (!config.theta0) return ParameterVector::zeros(config.model->dim());
  return ParameterVector(Eigen::Map<const Eigen::VectorXd>(
      config.theta0->data(), static_cast<Eigen::Index>(config.theta0->size())));
}

StudyConfig study_config(const RunConfig& config, std::size_t threads) {
  if (!config.sizes) throw InputError("scheme.n is required for simulation studies");
  std::optional<HypothesisSpec> hyp;
  if (config.r) hyp = HypothesisSpec(*config.r);
  return StudyConfig{config.model,
                     study_theta0(config),
                     GroupingScheme(config.group_width, *config.sizes),
                     hyp,
                     config.replicates,
                     config.seed,
                     config.limit_law_draws,
                     config.threshold_levels,
                     config.lr,
                     threads};
}

}  // namespace lrvec::cli

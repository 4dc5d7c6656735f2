#include "report.hpp"

#include <array>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "lrvec/errors.hpp"

namespace lrvec::cli {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 initialisation failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json manifest_json(const ManifestInputs& inputs) {
  Json files = Json::array();
  for (const auto& [role, path] : inputs.files) {
    files.push_back(Json{{"role", role}, {"path", path}, {"sha256", sha256_file(path)}});
  }
  return Json{{"command", inputs.command},
              {"config", inputs.resolved_config},
              {"inputs", std::move(files)},
              {"seed", inputs.seed},
              {"tool_version", kToolVersion}};
}

Json fit_json(const FitResult& fit) {
  return Json{{"theta", vector_json(fit.theta_hat.coords())},
              {"log_likelihood", fit.log_lik},
              {"converged", fit.converged},
              {"iterations", fit.iterations},
              {"gradient_norm", fit.grad_norm}};
}

Json covariance_json(const CovarianceComparison& cmp) {
  return Json{{"empirical", matrix_json(cmp.empirical)},
              {"theoretical", matrix_json(cmp.theoretical)},
              {"standard_error", matrix_json(cmp.standard_error)},
              {"max_sigma", cmp.max_sigma}};
}

Json exceedance_json(const ExceedanceEstimate& est) {
  return Json{{"probability", est.probability},
              {"standard_error", est.standard_error},
              {"draws", est.count},
              {"seed", est.seed}};
}

Json study_report_json(const StudyReport& report, const AcceptanceThresholds& thresholds) {
  Json out;
  out["replicates"] = report.replicates;
  out["failures"] = report.failures;
  out["estimator_covariance"] = covariance_json(report.estimator_covariance);
  out["estimator_covariance"]["pass"] = report.estimator_covariance.max_sigma <= thresholds.max_sigma;
  if (!report.ks.empty()) {
    Json ks = Json::array();
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
      ks.push_back(Json{{"window", i + 1},
                        {"statistic", report.ks[i].statistic},
                        {"p_value", report.ks[i].p_value},
                        {"pass", report.ks[i].p_value > thresholds.ks_alpha}});
    }
    out["ks"] = std::move(ks);
  }
  if (report.q_covariance) {
    out["statistic_covariance"] = covariance_json(*report.q_covariance);
    out["statistic_covariance"]["pass"] = report.q_covariance->max_sigma <= thresholds.max_sigma;
  }
  if (!report.exceedance.empty()) {
    Json ex = Json::array();
    for (const auto& e : report.exceedance) {
      ex.push_back(Json{{"level", e.level},
                        {"thresholds", e.thresholds},
                        {"empirical", e.empirical},
                        {"empirical_standard_error", e.empirical_se},
                        {"limit", exceedance_json(e.limit)},
                        {"sigma", e.sigma},
                        {"pass", e.sigma <= thresholds.max_sigma}});
    }
    out["joint_exceedance"] = std::move(ex);
  }
  out["acceptance"] = Json{{"ks_alpha", thresholds.ks_alpha},
                           {"max_sigma", thresholds.max_sigma},
                           {"pass", study_passes(report, thresholds)}};
  return out;
}

std::string dump_report(const Json& report) {
  return report.dump(2, ' ', false, Json::error_handler_t::replace) + "\n";
}

}  // namespace lrvec::cli

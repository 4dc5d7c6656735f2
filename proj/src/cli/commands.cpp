#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "config.hpp"
#include "csv.hpp"
#include "lrvec/cli.hpp"
#include "lrvec/errors.hpp"
#include "report.hpp"

namespace lrvec {

namespace {

using cli::Json;

struct Invocation {
  std::string command;
  std::string config_path;
  std::vector<std::string> data;
  std::optional<std::string> out_path;
  std::size_t threads = 0;
  std::optional<std::uint64_t> seed;
};

struct Context {
  Invocation args;
  cli::RunConfig config;
  std::ostream& out;
};

struct Outcome {
  Json report;
  int exit_code = kExitOk;
};

std::vector<std::pair<std::string, std::string>> manifest_files(const Context& ctx) {
  std::vector<std::pair<std::string, std::string>> files{{"config", ctx.args.config_path}};
  for (const auto& p : ctx.config.data) files.emplace_back("data", p);
  return files;
}

Json with_manifest(const Context& ctx, Json body) {
  Json report;
  report["manifest"] = cli::manifest_json({ctx.args.command, cli::resolved_config(ctx.config),
                                           manifest_files(ctx), ctx.config.seed});
  for (auto& item : body.items()) report[item.key()] = std::move(item.value());
  return report;
}

// Reads the data files and fills in (or checks) the scheme sizes.
Dataset load_dataset(Context& ctx) {
  auto& config = ctx.config;
  if (!ctx.args.data.empty()) config.data = ctx.args.data;
  if (config.data.empty()) throw InputError("no data files given (use --data or config.data)");
  Dataset data;
  std::vector<std::uint64_t> sizes;
  for (const auto& path : config.data) {
    data.push_back(cli::read_population(path, *config.model));
    sizes.push_back(data.back().size());
  }
  if (config.sizes && *config.sizes != sizes) {
    throw InputError("scheme.n does not match the data files (" + std::to_string(sizes.size()) +
                     " files)");
  }
  config.sizes = sizes;
  return data;
}

GroupingScheme scheme_of(const cli::RunConfig& config) {
  if (!config.sizes) throw InputError("scheme.n is required");
  return GroupingScheme(config.group_width, *config.sizes);
}

Json window_info(const GroupingScheme& scheme, std::size_t i) {
  return Json{{"window", i + 1},
              {"populations", Json::array({i + 1, i + scheme.group_width()})},
              {"size", scheme.window_size(i)}};
}

Outcome cmd_rho(Context& ctx) {
  if (!ctx.args.data.empty() || !ctx.config.data.empty()) load_dataset(ctx);
  const GroupingScheme scheme = scheme_of(ctx.config);
  Json windows = Json::array();
  for (std::size_t i = 0; i < scheme.windows(); ++i) windows.push_back(window_info(scheme, i));
  return {with_manifest(ctx, Json{{"windows", std::move(windows)},
                                  {"rho", cli::matrix_json(rho_matrix(scheme))}})};
}

Outcome cmd_fit(Context& ctx) {
  const Dataset data = load_dataset(ctx);
  const GroupingScheme scheme = scheme_of(ctx.config);
  const Model& model = *ctx.config.model;
  Json windows = Json::array();
  bool failed = false;
  if (ctx.config.r) {
    const auto lr = lr_vector(model, data, scheme, HypothesisSpec(*ctx.config.r), ctx.config.lr);
    for (std::size_t i = 0; i < lr.size(); ++i) {
      Json w = window_info(scheme, i);
      w["unconstrained"] = cli::fit_json(lr[i].unconstrained);
      w["constrained"] = cli::fit_json(lr[i].constrained);
      w["statistic"] = lr[i].statistic;
      w["failed"] = lr[i].failed;
      failed = failed || lr[i].failed;
      windows.push_back(std::move(w));
    }
  } else {
    for (std::size_t i = 0; i < scheme.windows(); ++i) {
      const auto fit = fit_unconstrained(model, pool_window(data, scheme, i), ctx.config.lr.solver);
      Json w = window_info(scheme, i);
      w["unconstrained"] = cli::fit_json(fit);
      w["failed"] = !fit.converged;
      failed = failed || !fit.converged;
      windows.push_back(std::move(w));
    }
  }
  Json body{{"status", failed ? "failed" : "ok"}, {"windows", std::move(windows)}};
  return {with_manifest(ctx, std::move(body)), failed ? kExitNumerical : kExitOk};
}

Outcome cmd_pvalue(Context& ctx) {
  if (!ctx.config.r) throw InputError("pvalue needs hyp.r in the config");
  const Dataset data = load_dataset(ctx);
  const GroupingScheme scheme = scheme_of(ctx.config);
  const int r = static_cast<int>(*ctx.config.r);
  const auto lr = lr_vector(*ctx.config.model, data, scheme, HypothesisSpec(*ctx.config.r),
                            ctx.config.lr);
  Json windows = Json::array();
  bool failed = false;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    Json w = window_info(scheme, i);
    w["statistic"] = lr[i].statistic;
    w["p_value"] = chi_square_survival(r, lr[i].statistic);
    w["failed"] = lr[i].failed;
    failed = failed || lr[i].failed;
    windows.push_back(std::move(w));
  }
  Json body{{"status", failed ? "failed" : "ok"}, {"r", r}, {"windows", std::move(windows)}};
  const CorrelationMatrix rho = rho_matrix(scheme);
  body["rho"] = cli::matrix_json(rho);
  if (!failed) {
    const auto est = joint_exceedance(LimitLaw(r, rho), statistics(lr), ctx.config.limit_law_draws,
                                      ctx.config.seed, ctx.args.threads);
    body["joint_exceedance"] = cli::exceedance_json(est);
  }
  return {with_manifest(ctx, std::move(body)), failed ? kExitNumerical : kExitOk};
}

std::string sidecar(const std::filesystem::path& out, const std::string& suffix) {
  return (out.parent_path() / (out.stem().string() + suffix)).string();
}

Outcome cmd_simulate(Context& ctx) {
  if (!ctx.args.out_path) throw InputError("simulate needs --out for the report and its CSV files");
  if (!ctx.config.r) throw InputError("simulate needs hyp.r in the config");
  const auto& config = ctx.config;
  const std::filesystem::path out(*ctx.args.out_path);
  const GroupingScheme scheme = scheme_of(config);
  const int r = static_cast<int>(*config.r);
  const LimitLaw law(r, rho_matrix(scheme));
  const auto batch = sample_limit_law(law, config.simulate.count, config.seed, ctx.args.threads);
  const double upper = chi_square_quantile(r, 0.999);

  Json files = Json::array();
  Json windows = Json::array();
  for (std::size_t i = 0; i < law.windows(); ++i) {
    const auto col = batch.q.col(static_cast<Eigen::Index>(i));
    const std::vector<double> values(col.begin(), col.end());
    const auto ks = ks_statistic(values, [r](double z) { return chi_square_cdf(r, z); });
    const std::string hist_path = sidecar(out, "_hist_w" + std::to_string(i + 1) + ".csv");
    cli::write_histogram(hist_path, cli::histogram(values, upper, config.simulate.bins));
    files.push_back(std::filesystem::path(hist_path).filename().string());
    windows.push_back(Json{{"window", i + 1},
                           {"mean", col.mean()},
                           {"ks", Json{{"statistic", ks.statistic}, {"p_value", ks.p_value}}},
                           {"histogram", std::filesystem::path(hist_path).filename().string()}});
  }
  if (config.simulate.write_samples) {
    const std::string path = sidecar(out, "_samples.csv");
    std::ofstream s(path, std::ios::binary);
    if (!s) throw InputError("cannot write '" + path + "'");
    for (std::size_t i = 0; i < law.windows(); ++i) s << (i ? ",q" : "q") << i + 1;
    s << '\n';
    for (Eigen::Index k = 0; k < batch.q.rows(); ++k) {
      for (Eigen::Index i = 0; i < batch.q.cols(); ++i) {
        s << (i ? "," : "") << cli::format_double(batch.q(k, i));
      }
      s << '\n';
    }
    files.push_back(std::filesystem::path(path).filename().string());
  }
  if (config.simulate.dataset_replicate) {
    StudyConfig study = cli::study_config(config, ctx.args.threads);
    if (!study.model->in_domain(study.theta0)) {
      throw InputError("study.theta0 lies outside the parameter space");
    }
    const Dataset data = simulate_dataset(study, *config.simulate.dataset_replicate);
    for (std::size_t p = 0; p < data.size(); ++p) {
      const std::string path = sidecar(out, "_pop" + std::to_string(p + 1) + ".csv");
      cli::write_population(path, data[p]);
      files.push_back(std::filesystem::path(path).filename().string());
    }
  }
  Json body{{"r", r},
            {"rho", cli::matrix_json(law.correlation())},
            {"draws", config.simulate.count},
            {"seed", config.seed},
            {"windows", std::move(windows)},
            {"covariance", cli::covariance_json(compare_covariance(batch.q, theoretical_cov_q(law)))},
            {"files", std::move(files)}};
  return {with_manifest(ctx, std::move(body))};
}

Outcome cmd_verify(Context& ctx) {
  const StudyConfig study = cli::study_config(ctx.config, ctx.args.threads);
  const StudyReport report = run_study(study);
  const bool pass = study_passes(report, ctx.config.acceptance);
  Json body{{"status", pass ? "pass" : "fail"},
            {"study", cli::study_report_json(report, ctx.config.acceptance)}};
  return {with_manifest(ctx, std::move(body)), pass ? kExitOk : kExitNumerical};
}

void emit(const Context& ctx, const Json& report) {
  const std::string text = cli::dump_report(report);
  if (ctx.args.out_path) {
    std::ofstream f(*ctx.args.out_path, std::ios::binary);
    if (!f) throw InputError("cannot write report '" + *ctx.args.out_path + "'");
    f << text;
    if (!f) throw InputError("failed writing report '" + *ctx.args.out_path + "'");
  } else {
    ctx.out << text;
  }
}

int execute(const Invocation& args, std::ostream& out) {
  Context ctx{args, cli::load_config(args.config_path), out};
  if (args.seed) ctx.config.seed = *args.seed;
  Outcome outcome;
  if (args.command == "rho") {
    outcome = cmd_rho(ctx);
  } else if (args.command == "fit") {
    outcome = cmd_fit(ctx);
  } else if (args.command == "pvalue") {
    outcome = cmd_pvalue(ctx);
  } else if (args.command == "simulate") {
    outcome = cmd_simulate(ctx);
  } else {
    outcome = cmd_verify(ctx);
  }
  emit(ctx, outcome.report);
  return outcome.exit_code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Likelihood-ratio vectors for overlapping windows of populations", "lrvec"};
  app.require_subcommand(1);
  Invocation args;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"rho", "Print the window correlation matrix of the scheme"},
      {"fit", "Fit each window by maximum likelihood"},
      {"pvalue", "Likelihood-ratio statistics with marginal and joint p-values"},
      {"simulate", "Sample the joint limit law and write histograms"},
      {"verify", "Run the Monte Carlo study and check the acceptance thresholds"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args.config_path, "JSON config file")->required();
    sub->add_option("--data", args.data, "CSV data files in population order");
    sub->add_option("--out", args.out_path, "Report path (default stdout)");
    sub->add_option("--threads", args.threads, "Worker threads, 0 for all cores")
        ->capture_default_str();
    sub->add_option("--seed", args.seed, "Master seed, overrides the config");
    sub->callback([&args, name = name] { args.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    return execute(args, out);
  } catch (const InputError& e) {
    err << "lrvec: input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DomainError& e) {
    err << "lrvec: input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::ordered_json::exception& e) {
    err << "lrvec: config error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "lrvec: file error: " << e.what() << '\n';
    return kExitInput;
  } catch (const StudyError& e) {
    err << "lrvec: study failed: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "lrvec: numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace lrvec

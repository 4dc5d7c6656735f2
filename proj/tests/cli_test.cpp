#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <unistd.h>
#include <json.hpp>

#include "lrvec/cli.hpp"
#include "lrvec/limitdist.hpp"
#include "lrvec/simharness.hpp"

using namespace lrvec;
using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lrvec_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
    return path(name);
  }

  std::string config(const std::string& name, const Json& doc) const {
    return write(name, doc.dump());
  }

  static RunResult run(std::vector<std::string> args) {
    args.insert(args.begin(), "lrvec");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

Json gaussian(int g, std::vector<int> n) {
  return Json{{"model", {{"name", "gaussian_mean"}}}, {"scheme", {{"G", g}, {"n", n}}}};
}

std::string column(const std::vector<double>& values) {
  std::ostringstream s;
  s.precision(17);
  s << "x1\n";
  for (double v : values) s << v << "\n";
  return s.str();
}

}  // namespace

TEST_F(CliTest, RhoHalfOverlap) {
  const auto r = run({"rho", "--config", config("c.json", gaussian(2, {100, 100, 100}))});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report["rho"][0][1].get<double>(), 0.5);
  EXPECT_EQ(report["manifest"]["command"], "rho");
  EXPECT_EQ(report["manifest"]["inputs"][0]["sha256"].get<std::string>().size(), 64u);
}

TEST_F(CliTest, RhoDisjointWindowsIsIdentity) {
  const auto r = run({"rho", "--config", config("c.json", gaussian(1, {3, 4, 5}))});
  ASSERT_EQ(r.code, kExitOk);
  const Json rho = Json::parse(r.out)["rho"];
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(rho[i][j].get<double>(), i == j ? 1.0 : 0.0);
  }
}

TEST_F(CliTest, RhoGroupWiderThanPopulationsIsConfigError) {
  const auto r = run({"rho", "--config", config("c.json", gaussian(4, {1, 2, 3}))});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("group width"), std::string::npos);
}

TEST_F(CliTest, RhoInfersSizesFromData) {
  Json doc{{"model", {{"name", "gaussian_mean"}}}, {"scheme", {{"G", 2}}}};
  const auto a = write("a.csv", column({1, 2}));
  const auto b = write("b.csv", column({1, 2}));
  const auto r = run({"rho", "--config", config("c.json", doc), "--data", a, b});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report["manifest"]["config"]["scheme"]["n"], Json::array({2, 2}));
  EXPECT_EQ(report["manifest"]["inputs"].size(), 3u);
}

TEST_F(CliTest, FitSingleWindowMean) {
  Json doc = gaussian(1, {3});
  doc["data"] = {"pop.csv"};
  write("pop.csv", column({1, 2, 3}));
  const auto r = run({"fit", "--config", config("c.json", doc)});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json w = Json::parse(r.out)["windows"][0];
  EXPECT_NEAR(w["unconstrained"]["theta"][0].get<double>(), 2.0, 1e-12);
  EXPECT_TRUE(w["unconstrained"]["converged"].get<bool>());
}

TEST_F(CliTest, FitFullHypothesisGivesOrigin) {
  Json doc = gaussian(2, {2, 2, 2});
  doc["hyp"] = {{"r", 1}};
  const auto a = write("a.csv", column({0.5, 1.0}));
  const auto b = write("b.csv", column({-0.5, 2.0}));
  const auto c = write("c.csv", column({3.0, 1.0}));
  const auto r = run({"fit", "--config", config("c.json", doc), "--data", a, b, c});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const auto& w : Json::parse(r.out)["windows"]) {
    EXPECT_EQ(w["constrained"]["theta"][0].get<double>(), 0.0);
  }
}

TEST_F(CliTest, MissingDataFileNamesPath) {
  const auto missing = path("nope.csv");
  const auto r = run({"fit", "--config", config("c.json", gaussian(1, {3})), "--data", missing});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find(missing), std::string::npos);
}

TEST_F(CliTest, FitFailureEmitsPartialReport) {
  Json doc{{"model", {{"name", "poisson_lograte"}}}, {"scheme", {{"G", 1}}}, {"hyp", {{"r", 1}}}};
  const auto a = write("a.csv", column({0, 0, 0}));
  const auto r = run({"fit", "--config", config("c.json", doc), "--data", a});
  EXPECT_EQ(r.code, kExitNumerical);
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report["status"], "failed");
  EXPECT_TRUE(report["windows"][0]["failed"].get<bool>());
}

TEST_F(CliTest, PValueOfZeroDataIsOne) {
  Json doc = gaussian(2, {3, 3, 3});
  doc["hyp"] = {{"r", 1}};
  doc["study"] = {{"limit_law_draws", 2000}};
  std::vector<std::string> args = {"pvalue", "--config", config("c.json", doc), "--data"};
  for (const char* name : {"a.csv", "b.csv", "c.csv"}) args.push_back(write(name, column({0, 0, 0})));
  const auto r = run(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json report = Json::parse(r.out);
  for (const auto& w : report["windows"]) {
    EXPECT_EQ(w["statistic"].get<double>(), 0.0);
    EXPECT_EQ(w["p_value"].get<double>(), 1.0);
  }
  EXPECT_EQ(report["joint_exceedance"]["probability"].get<double>(), 1.0);
  EXPECT_EQ(report["joint_exceedance"]["seed"].get<std::uint64_t>(), 1u);
}

TEST_F(CliTest, PValueSingleWindowClosedForm) {
  Json doc = gaussian(1, {100});
  doc["hyp"] = {{"r", 1}};
  const auto a = write("a.csv", column(std::vector<double>(100, 0.3)));
  const auto r = run({"pvalue", "--config", config("c.json", doc), "--data", a, "--seed", "5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json report = Json::parse(r.out);
  const Json w = report["windows"][0];
  // N xbar^2 = 100 * 0.09; P[chi2_1 > 9] = erfc(3 / sqrt 2).
  EXPECT_NEAR(w["statistic"].get<double>(), 9.0, 1e-9);
  EXPECT_NEAR(w["p_value"].get<double>(), std::erfc(3.0 / std::sqrt(2.0)), 1e-10);
  EXPECT_NEAR(w["p_value"].get<double>(), 0.0027, 1e-4);
  EXPECT_EQ(report["manifest"]["seed"].get<std::uint64_t>(), 5u);
  const Json& joint = report["joint_exceedance"];
  EXPECT_LE(std::abs(joint["probability"].get<double>() - w["p_value"].get<double>()),
            4.0 * joint["standard_error"].get<double>());
}

TEST_F(CliTest, PValueWithoutHypothesisIsConfigError) {
  const auto a = write("a.csv", column({1.0}));
  EXPECT_EQ(run({"pvalue", "--config", config("c.json", gaussian(1, {1})), "--data", a}).code,
            kExitInput);
}

TEST_F(CliTest, BadInputsExitTwo) {
  const auto cfg = config("c.json", gaussian(1, {2}));
  EXPECT_EQ(run({"fit", "--config", cfg, "--data", write("h.csv", "y1\n1\n2\n")}).code, kExitInput);
  EXPECT_EQ(run({"fit", "--config", cfg, "--data", write("n.csv", "x1\n1\nabc\n")}).code, kExitInput);
  EXPECT_EQ(run({"fit", "--config", cfg, "--data", write("e.csv", "")}).code, kExitInput);
  EXPECT_EQ(run({"fit", "--config", cfg, "--data", write("s.csv", column({1, 2, 3}))}).code,
            kExitInput);

  Json poisson{{"model", {{"name", "poisson_lograte"}}}, {"scheme", {{"G", 1}}}};
  EXPECT_EQ(run({"fit", "--config", config("p.json", poisson), "--data",
                 write("neg.csv", "x1\n-1\n")})
                .code,
            kExitInput);

  Json unknown = gaussian(1, {2});
  unknown["scheme"]["extra"] = 1;
  EXPECT_EQ(run({"rho", "--config", config("u.json", unknown)}).code, kExitInput);
  Json top = gaussian(1, {2});
  top["colour"] = "red";
  EXPECT_EQ(run({"rho", "--config", config("t.json", top)}).code, kExitInput);
  EXPECT_EQ(run({"rho", "--config", write("bad.json", "{not json")}).code, kExitInput);
  EXPECT_EQ(run({"rho", "--config", path("absent.json")}).code, kExitInput);
  Json model = gaussian(1, {2});
  model["model"]["name"] = "cauchy";
  EXPECT_EQ(run({"rho", "--config", config("m.json", model)}).code, kExitInput);
  EXPECT_EQ(run({"rho"}).code, kExitInput);
  EXPECT_EQ(run({"frobnicate"}).code, kExitInput);
  EXPECT_EQ(run({"rho", "--config", cfg, "--threads", "many"}).code, kExitInput);
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, kExitOk); }

TEST_F(CliTest, VerifyTooFewReplicatesIsConfigError) {
  Json doc = gaussian(2, {50, 50, 50});
  doc["hyp"] = {{"r", 1}};
  doc["study"] = {{"replicates", 10}};
  const auto r = run({"verify", "--config", config("c.json", doc)});
  EXPECT_EQ(r.code, kExitInput);
}

TEST_F(CliTest, VerifyFailureBudgetExitsThree) {
  Json doc{{"model", {{"name", "poisson_lograte"}, {"params", {{"baseline", 0.001}}}}},
           {"scheme", {{"G", 1}, {"n", {5, 5}}}},
           {"hyp", {{"r", 1}}},
           {"study", {{"replicates", 100}}}};
  const auto r = run({"verify", "--config", config("c.json", doc)});
  EXPECT_EQ(r.code, kExitNumerical);
  EXPECT_NE(r.err.find("failed"), std::string::npos);
}

TEST_F(CliTest, VerifyDeskScaleGaussianStudyPasses) {
  Json doc = gaussian(2, {2000, 2000, 2000});
  doc["hyp"] = {{"r", 1}};
  doc["study"] = {{"replicates", 2000}, {"seed", 12345}};
  const auto r = run({"verify", "--config", config("c.json", doc)});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report["status"], "pass");
  EXPECT_TRUE(report["study"]["acceptance"]["pass"].get<bool>());
}

TEST_F(CliTest, VerifyReportsAreByteIdentical) {
  Json doc{{"model", {{"name", "gaussian_mean_logsd"}}},
           {"scheme", {{"G", 2}, {"n", {60, 80, 70}}}},
           {"hyp", {{"r", 1}}},
           {"study", {{"replicates", 200}, {"seed", 9}, {"theta0", {0.0, 0.2}},
                      {"limit_law_draws", 20000}}}};
  const auto cfg = config("c.json", doc);
  const auto a = run({"verify", "--config", cfg, "--threads", "1", "--out", path("a.json")});
  const auto b = run({"verify", "--config", cfg, "--threads", "1", "--out", path("b.json")});
  const auto c = run({"verify", "--config", cfg, "--threads", "8", "--out", path("c.json")});
  EXPECT_EQ(a.code, b.code);
  EXPECT_EQ(a.code, c.code);
  EXPECT_NE(a.code, kExitInput) << a.err;
  const auto text = slurp(path("a.json"));
  EXPECT_FALSE(text.empty());
  EXPECT_EQ(text, slurp(path("b.json")));
  EXPECT_EQ(text, slurp(path("c.json")));
}

TEST_F(CliTest, SimulateHistogramFollowsChiSquareTwo) {
  Json doc = gaussian(1, {10, 10});
  doc["model"] = {{"name", "gaussian_mean"}, {"params", {{"dim", 2}}}};
  doc["hyp"] = {{"r", 2}};
  doc["simulate"] = {{"count", 1000000}, {"bins", 40}};
  const auto out = path("sim.json");
  const auto r = run({"simulate", "--config", config("c.json", doc), "--out", out});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json report = Json::parse(slurp(out));
  ASSERT_EQ(report["windows"].size(), 2u);
  for (const auto& w : report["windows"]) EXPECT_GT(w["ks"]["p_value"].get<double>(), 0.01);

  // Bin counts against the chi2_2 cell probabilities exp(-a/2) - exp(-b/2).
  std::ifstream hist(path("sim_hist_w1.csv"));
  std::string line;
  std::getline(hist, line);
  EXPECT_EQ(line, "bin_left,bin_right,count");
  std::size_t total = 0, rows = 0;
  double chi2 = 0.0;
  while (std::getline(hist, line)) {
    std::istringstream row(line);
    std::string left_text, right_text, count_text;
    std::getline(row, left_text, ',');
    std::getline(row, right_text, ',');
    std::getline(row, count_text);
    const double left = std::stod(left_text);
    const double right = right_text == "inf" ? INFINITY : std::stod(right_text);
    const auto count = static_cast<double>(std::stoull(count_text));
    const double p = std::exp(-left / 2) - (std::isinf(right) ? 0.0 : std::exp(-right / 2));
    const double expected = p * 1e6;
    chi2 += (count - expected) * (count - expected) / expected;
    total += static_cast<std::size_t>(count);
    ++rows;
  }
  EXPECT_EQ(rows, 41u);
  EXPECT_EQ(total, 1000000u);
  // 40 degrees of freedom; the 0.999 quantile is about 73.4.
  EXPECT_LT(chi2, 73.4);
}

TEST_F(CliTest, SimulateRequiresOut) {
  Json doc = gaussian(1, {10});
  doc["hyp"] = {{"r", 1}};
  EXPECT_EQ(run({"simulate", "--config", config("c.json", doc)}).code, kExitInput);
}

TEST_F(CliTest, SimulatedDatasetRoundTripsThroughPValue) {
  Json doc{{"model", {{"name", "gaussian_mean_logsd"}}},
           {"scheme", {{"G", 2}, {"n", {30, 40, 25}}}},
           {"hyp", {{"r", 1}}},
           {"study", {{"seed", 31}, {"theta0", {0.0, -0.4}}, {"limit_law_draws", 1000}}},
           {"simulate", {{"count", 1000}, {"dataset_replicate", 7}}}};
  const auto cfg = config("c.json", doc);
  ASSERT_EQ(run({"simulate", "--config", cfg, "--out", path("s.json")}).code, kExitOk);
  const auto r = run({"pvalue", "--config", cfg, "--data", path("s_pop1.csv"), path("s_pop2.csv"),
                      path("s_pop3.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json report = Json::parse(r.out);

  StudyConfig study{make_gaussian_mean_logsd(), ParameterVector{0.0, -0.4},
                    GroupingScheme(2, {30, 40, 25}), HypothesisSpec(1)};
  study.seed = 31;
  const auto expected =
      statistics(lr_vector(*study.model, simulate_dataset(study, 7), study.scheme, *study.hyp));
  ASSERT_EQ(report["windows"].size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(report["windows"][i]["statistic"].get<double>(), expected[i]);
  }
}

TEST_F(CliTest, SeedFlagOverridesConfig) {
  Json doc = gaussian(1, {10});
  doc["hyp"] = {{"r", 1}};
  doc["study"] = {{"seed", 4}};
  const auto cfg = config("c.json", doc);
  const auto base = Json::parse(run({"rho", "--config", cfg}).out);
  const auto over = Json::parse(run({"rho", "--config", cfg, "--seed", "18446744073709551615"}).out);
  EXPECT_EQ(base["manifest"]["seed"].get<std::uint64_t>(), 4u);
  EXPECT_EQ(over["manifest"]["seed"].get<std::uint64_t>(), 18446744073709551615ull);
}

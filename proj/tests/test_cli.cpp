#include "cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  int code;
  std::string out, err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("hawking_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << body;
    return p.string();
  }

  Outcome invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = hawking::cli::run(args, out, err);
    return {code, out.str(), err.str()};
  }

  json read_json(const fs::path& p) {
    std::ifstream f(p);
    return json::parse(f);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  }

  fs::path dir_;
};

const char* kFoliate = R"({
  "preset": "conformal_quadratic", "params": {"epsilon": 0.01, "k": [[0.1,0.05,0],[0.05,-0.05,0.02],[0,0.02,0.03]]},
  "r_min": 0.03, "r_max": 0.048, "n_steps": 2, "solver": {"band_limit": 6}})";

}  // namespace

TEST_F(Cli, FlatEnergyVanishes) {
  auto cfg = write_config("c.json", R"({"preset": "flat", "radius": 1.0})");
  auto r = invoke({"energy", "--config", cfg, "--out", (dir_ / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = read_json(dir_ / "o" / "energy.json");
  EXPECT_NEAR(j["result"]["surfaces"][0]["hawking_energy"].get<double>(), 0.0, 1e-12);
  EXPECT_EQ(j["version"], "0.1.0");
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
  EXPECT_EQ(slurp(dir_ / "o" / "energy.csv").rfind("# version 0.1.0 config_hash " + j["config_hash"].get<std::string>(), 0), 0u);
}

TEST_F(Cli, ConstantKIntegralOfP2) {
  // P = tr k - k(x, x) on flat round spheres:
  // int P^2 = r^2 (4 pi T^2 - (8 pi / 3) T^2 + (4 pi / 15)(T^2 + 2 |k|^2)).
  auto cfg = write_config("c.json", R"({"preset": "constant_k", "params": {"k": [[0.3,0.1,0],[0.1,-0.2,0.05],[0,0.05,0.4]]},
                                       "radii": [0.5, 2.0]})");
  auto r = invoke({"energy", "--config", cfg, "--out", dir_.string(), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "energy.csv"));
  const double T = 0.5, kk = 0.09 + 0.04 + 0.16 + 2 * (0.01 + 0.0025);
  for (const auto& s : read_json(dir_ / "energy.json")["result"]["surfaces"]) {
    const double rad = s["r"].get<double>();
    const double expected = rad * rad * (4 * kPi * T * T - 8 * kPi / 3 * T * T + 4 * kPi / 15 * (T * T + 2 * kk));
    EXPECT_NEAR(s["int_P2"].get<double>(), expected, 1e-10 * expected);
  }
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  auto bad = write_config("bad.json", "{\"preset\": \"flat\", ");
  auto r = invoke({"energy", "--config", bad, "--out", dir_.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("malformed config"), std::string::npos);

  auto unknown = write_config("u.json", R"({"preset": "flat", "radius": 1.0, "radiuss": 2.0})");
  r = invoke({"energy", "--config", unknown, "--out", dir_.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("radiuss"), std::string::npos);

  auto preset = write_config("p.json", R"({"preset": "nope", "radius": 1.0})");
  EXPECT_EQ(invoke({"energy", "--config", preset, "--out", dir_.string()}).code, 2);
  EXPECT_EQ(invoke({"energy", "--config", preset, "--grid", "3by4"}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_FALSE(fs::exists(dir_ / "energy.json"));
}

TEST_F(Cli, FlatSolveIsNumericalFailure) {
  auto cfg = write_config("c.json", R"({"preset": "flat", "radius": 0.05})");
  auto r = invoke({"solve", "--config", cfg, "--out", dir_.string(), "--grid", "20x40"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("DegenerateHessian"), std::string::npos);
}

TEST_F(Cli, FoliateResumeIsIdentical) {
  auto cfg = write_config("c.json", kFoliate);
  auto r = invoke({"foliate", "--config", cfg, "--out", (dir_ / "full").string(), "--grid", "20x40"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto full = read_json(dir_ / "full" / "trace.json")["result"];
  ASSERT_EQ(full["leaves"].size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_GT(full["lapse_min"][i].get<double>(), 0.0);
  for (std::size_t i = 1; i < 3; ++i)
    EXPECT_GT(full["leaves"][i]["r"].get<double>(), full["leaves"][i - 1]["r"].get<double>());

  // Truncate to the first two leaves and resume.
  auto head = read_json(dir_ / "full" / "trace.json");
  head["result"]["leaves"].erase(2);
  std::ofstream(dir_ / "head.json") << head.dump();
  json c = json::parse(kFoliate);
  c["resume"] = (dir_ / "head.json").string();
  auto cfg2 = write_config("c2.json", c.dump());
  r = invoke({"foliate", "--config", cfg2, "--out", (dir_ / "resumed").string(), "--grid", "20x40"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto res = read_json(dir_ / "resumed" / "trace.json")["result"];
  const auto& a = full["leaves"][2];
  const auto& b = res["leaves"][2];
  EXPECT_NEAR(a["lambda"].get<double>(), b["lambda"].get<double>(), 1e-10);
  for (std::size_t i = 0; i < a["phi"]["coeffs"].size(); ++i)
    EXPECT_NEAR(a["phi"]["coeffs"][i].get<double>(), b["phi"]["coeffs"][i].get<double>(), 1e-10);

  // Deterministic: identical config gives byte-identical files.
  r = invoke({"foliate", "--config", cfg, "--out", (dir_ / "again").string(), "--grid", "20x40"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(slurp(dir_ / "full" / "trace.json"), slurp(dir_ / "again" / "trace.json"));
  EXPECT_EQ(slurp(dir_ / "full" / "trace.csv"), slurp(dir_ / "again" / "trace.csv"));
}

TEST_F(Cli, BrokenContinuationFlushesPartialTrace) {
  json c = json::parse(kFoliate);
  c["solver"]["max_iterations"] = 0;
  // A resumed leaf far from any solution: every further step fails.
  json leaf = {{"r", 0.03},          {"p", {0, 0, 0}},   {"tau", {0, 0, 0}}, {"lambda", 1.0},
               {"phi", {{"L", 6}, {"coeffs", std::vector<double>(49, 0.0)}}},
               {"pi0_abs", 0.0},     {"pi1_norm", 0.0},  {"perp_norm", 0.0}, {"projected_residual", 0.0},
               {"tolerance", 0.0},   {"converged_to_target", true},          {"newton_iterations", 0},
               {"jacobian_evaluations", 0},
               {"energy", {{"area", 0.0}, {"willmore", 0.0}, {"hawking_functional", 0.0}, {"hawking_energy", 0.0},
                           {"int_H2", 0.0}, {"int_P2", 0.0}}}};
  std::ofstream(dir_ / "seed.json") << json({{"result", {{"leaves", {leaf}}}}}).dump();
  c["resume"] = (dir_ / "seed.json").string();
  auto cfg = write_config("c.json", c.dump());
  auto r = invoke({"foliate", "--config", cfg, "--out", dir_.string(), "--grid", "20x40"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("ContinuationBroken"), std::string::npos);
  auto t = read_json(dir_ / "trace.json")["result"];
  EXPECT_EQ(t["leaves"].size(), 1u);
  EXPECT_FALSE(t["failure"].get<std::string>().empty());
}

TEST_F(Cli, SmallSphereExcess) {
  auto zero = write_config("z.json", R"({"preset": "conformal_quadratic", "params": {"epsilon": 0.05},
                                       "point": [0.1, 0.0, 0.0], "smallsphere": {"electric": [[0.1,0,0],[0,0.2,0],[0,0,-0.3]]}})");
  auto r = invoke({"smallsphere", "--config", zero, "--out", (dir_ / "z").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto z = read_json(dir_ / "z" / "smallsphere.json")["result"];
  EXPECT_NEAR(z["excess_fit"].get<double>(), 0.0, 1e-8);
  for (const auto& row : z["rows"]) EXPECT_NEAR(row["excess"].get<double>(), 0.0, 1e-9);

  auto tf = write_config("t.json", R"({"preset": "flat", "smallsphere": {"source": "riemann",
                                      "k": [[1,0,0],[0,-1,0],[0,0,0]], "l_values": [0.01, 0.02, 0.03]}})");
  r = invoke({"smallsphere", "--config", tf, "--out", (dir_ / "t").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto t = read_json(dir_ / "t" / "smallsphere.json")["result"];
  EXPECT_NEAR(t["excess_fit"].get<double>(), 0.2, 1e-6);
  EXPECT_NEAR(t["excess_candidate_tenth"].get<double>(), 0.2, 1e-15);
  EXPECT_NEAR(t["excess_candidate_six_fifths"].get<double>(), 2.4, 1e-15);
}

TEST_F(Cli, SmallSphereNoRootIsWarning) {
  // Pure Rm(e1,e0,e1,e0) = 1 curvature: the light-cut area stops growing for large l.
  auto cfg = write_config("c.json", R"({"preset": "flat", "smallsphere": {"source": "riemann",
                                       "components": [[1,0,1,0,1.0],[2,0,2,0,1.0],[3,0,3,0,1.0]],
                                       "l_values": [0.1, 3.0]}})");
  auto r = invoke({"smallsphere", "--config", cfg, "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning: no radius match"), std::string::npos);
  auto rows = read_json(dir_ / "smallsphere.json")["result"]["rows"];
  EXPECT_FALSE(rows[0]["no_root"].get<bool>());
  EXPECT_TRUE(rows[1]["no_root"].get<bool>());
}

TEST_F(Cli, CheckSuitePasses) {
  auto r = invoke({"check", "--out", dir_.string(), "--grid", "16x32", "--seed", "5"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  auto j = read_json(dir_ / "check.json")["result"];
  EXPECT_TRUE(j["all_pass"].get<bool>());
  EXPECT_EQ(j["seed"], 5);
}

TEST(CliHash, StableAndSensitive) {
  EXPECT_EQ(hawking::cli::config_hash(""), "cbf29ce484222325");
  EXPECT_EQ(hawking::cli::config_hash("a"), "af63dc4c8601ec8c");
  EXPECT_NE(hawking::cli::config_hash("{\"a\":1}"), hawking::cli::config_hash("{\"a\":2}"));
}

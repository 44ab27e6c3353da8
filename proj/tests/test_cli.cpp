#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "semplan/cli.hpp"
#include "semplan/errors.hpp"
#include "support.hpp"

using namespace semplan;
using semplan::testing::fixture_path;
using semplan::testing::scratch_dir;
using semplan::testing::slurp;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "semplan");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kPrompt = "The site is busy and the forklift is reversing.";

std::vector<std::string> mock_plan_args(const std::filesystem::path& out) {
  return {"plan", "--map", fixture_path("construction_site.json").string(), "--prompt", kPrompt,
          "--mock", "--seed", "7", "--R", "500", "--out", out.string()};
}

}  // namespace

TEST(Cli, SampleMockIsDeterministicAndHasKReadings) {
  const auto a = scratch_dir("cli_sample_a");
  const auto b = scratch_dir("cli_sample_b");
  for (const auto& dir : {a, b}) {
    const auto r = run_cli({"sample", "--map", fixture_path("construction_site.json").string(), "--prompt", kPrompt,
                            "--mock", "--seed", "7", "--k", "16", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("crane:"), std::string::npos);
  }
  const auto text = slurp(a / "samples.json");
  EXPECT_EQ(text, slurp(b / "samples.json"));
  const auto j = nlohmann::json::parse(text);
  for (const auto& [name, values] : j["per_class"].items()) EXPECT_EQ(values.size(), 16u) << name;
  EXPECT_EQ(j["config"]["bootstrap"]["seed"], 7);
}

TEST(Cli, LiveModeWithoutKeyIsASensorFailure) {
  const auto dir = scratch_dir("cli_live");
  ::unsetenv("SEMPLAN_CLI_TEST_KEY");
  const auto cfg = dir / "cfg.json";
  {
    std::ofstream(cfg) << R"({"sensor":{"api_key_env":"SEMPLAN_CLI_TEST_KEY"}})";
  }
  const auto r = run_cli({"sample", "--config", cfg.string(), "--map",
                          fixture_path("construction_site.json").string(), "--prompt", kPrompt, "--out", dir.string()});
  EXPECT_EQ(r.code, cli::kSensorFailure);
  EXPECT_NE(r.err.find("SEMPLAN_CLI_TEST_KEY"), std::string::npos);
}

TEST(Cli, PlanWritesArtifactsWithEmbeddedConfig) {
  const auto dir = scratch_dir("cli_plan");
  const auto r = run_cli(mock_plan_args(dir));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Posterior CVaR"), std::string::npos);
  EXPECT_NE(r.out.find("Min. Dist."), std::string::npos);
  for (const char* name : {"plan.json", "metrics.json", "metrics.txt", "overlay.svg"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
  for (const char* name : {"plan.json", "metrics.json"}) {
    const auto j = nlohmann::json::parse(slurp(dir / name));
    EXPECT_EQ(j["config"]["bootstrap"]["seed"], 7) << name;
    EXPECT_EQ(j["config"]["bootstrap"]["R"], 500) << name;
    EXPECT_EQ(j["config"]["mode"], "mock") << name;
  }
  EXPECT_NE(slurp(dir / "overlay.svg").find("&quot;seed&quot;:7"), std::string::npos);
}

TEST(Cli, PlanIsByteIdenticalAcrossRuns) {
  const auto a = scratch_dir("cli_repro_a");
  const auto b = scratch_dir("cli_repro_b");
  ASSERT_EQ(run_cli(mock_plan_args(a)).code, 0);
  ASSERT_EQ(run_cli(mock_plan_args(b)).code, 0);
  for (const char* name : {"plan.json", "metrics.json", "overlay.svg"}) {
    // The output directory is part of no artifact, so whole files compare.
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
}

TEST(Cli, GammaZeroMatchesAStarBaseline) {
  const auto a = scratch_dir("cli_g0");
  const auto b = scratch_dir("cli_astar");
  auto args_a = mock_plan_args(a);
  args_a.insert(args_a.end(), {"--gamma", "0"});
  auto args_b = mock_plan_args(b);
  args_b.insert(args_b.end(), {"--baseline", "astar"});
  ASSERT_EQ(run_cli(args_a).code, 0);
  ASSERT_EQ(run_cli(args_b).code, 0);
  auto pa = nlohmann::json::parse(slurp(a / "plan.json"));
  auto pb = nlohmann::json::parse(slurp(b / "plan.json"));
  pa.erase("config");
  pb.erase("config");
  EXPECT_EQ(pa, pb);
}

TEST(Cli, HighRiskCacheBeatsBaselineClearance) {
  const auto dir = scratch_dir("cli_cache");
  const auto map = fixture_path("construction_site.json").string();
  // Record a high-risk sample set, then plan from the cache.
  const auto cfg = dir / "cfg.json";
  {
    std::ofstream(cfg) << R"({"mock":{"default":[9,1]}})";
  }
  ASSERT_EQ(run_cli({"sample", "--config", cfg.string(), "--map", map, "--prompt", kPrompt, "--seed", "7", "--out",
                     dir.string()})
                .code,
            0);
  const auto r = run_cli({"plan", "--map", map, "--prompt", kPrompt, "--cache", (dir / "samples.json").string(),
                          "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "metrics.json"));
  EXPECT_EQ(j["config"]["mode"], "cache");
  EXPECT_GT(j["comparison"][1]["metrics"]["min_dist"].get<double>(),
            j["comparison"][0]["metrics"]["min_dist"].get<double>());
}

TEST(Cli, ErrorsMapToExitCodes) {
  const auto dir = scratch_dir("cli_errors");
  EXPECT_EQ(run_cli({"plan", "--map", "/nonexistent.json", "--prompt", "x", "--mock", "--out", dir.string()}).code,
            cli::kConfigError);
  EXPECT_EQ(run_cli({"plan", "--map", fixture_path("construction_site.json").string(), "--mock", "--out",
                     dir.string()})
                .code,
            cli::kConfigError);
  EXPECT_EQ(run_cli({"plan", "--bogus-flag"}).code, cli::kConfigError);
  EXPECT_EQ(run_cli({}).code, cli::kConfigError);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({"plan", "--map", fixture_path("construction_site.json").string(), "--prompt", "x", "--mock",
                     "--alpha", "1.5", "--out", dir.string()})
                .code,
            cli::kConfigError);
}

TEST(Cli, WalledMapExitsWithNoPath) {
  const auto dir = scratch_dir("cli_nopath");
  {
    std::ofstream(dir / "wall.json")
        << R"({"width":6,"height":4,"start":[0,0],"goal":[5,3],"classes":[{"name":"wall","rects":[[3,0,3,3]]}]})";
  }
  const auto r = run_cli({"plan", "--map", (dir / "wall.json").string(), "--prompt", "x", "--mock", "--R", "50",
                          "--out", dir.string()});
  EXPECT_EQ(r.code, cli::kNoPath);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "plan.json"))["status"], "no_path");
}

TEST(Cli, ThresholdTurnsCostlyPlansIntoNoPath) {
  const auto dir = scratch_dir("cli_threshold");
  auto args = mock_plan_args(dir);
  args.insert(args.end(), {"--threshold", "0.0001"});
  const auto r = run_cli(args);
  EXPECT_EQ(r.code, cli::kNoPath);
  EXPECT_NE(r.err.find("threshold"), std::string::npos);
  auto loose = mock_plan_args(dir);
  loose.insert(loose.end(), {"--threshold", "1000"});
  EXPECT_EQ(run_cli(loose).code, 0);
}

TEST(Cli, ConfigFileWithFlagOverrides) {
  const auto dir = scratch_dir("cli_config");
  const auto cfg = dir / "run.json";
  {
    std::ofstream(cfg) << nlohmann::json{{"map", fixture_path("construction_site.json").string()},
                                         {"prompt", kPrompt},
                                         {"mock", {{"enabled", true}}},
                                         {"bootstrap", {{"R", 300}, {"alpha", 0.2}, {"seed", 3}}},
                                         {"planner", {{"gamma", 1.0}, {"w2", 1.5}}}}
                              .dump();
  }
  const auto r = run_cli({"posterior", "--config", cfg.string(), "--seed", "9", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "posterior.json"));
  EXPECT_EQ(j["config"]["bootstrap"]["R"], 300);
  EXPECT_EQ(j["config"]["bootstrap"]["seed"], 9);
  EXPECT_DOUBLE_EQ(j["config"]["bootstrap"]["alpha"].get<double>(), 0.2);
  EXPECT_DOUBLE_EQ(j["config"]["planner"]["w2"].get<double>(), 1.5);
  EXPECT_EQ(j["posterior"].size(), 4u);
  EXPECT_EQ(j["config"].dump().find("sk-"), std::string::npos);
}

TEST(Cli, PosteriorFileFeedsPlanAndRender) {
  const auto dir = scratch_dir("cli_posterior");
  const auto map = fixture_path("construction_site.json").string();
  ASSERT_EQ(run_cli({"posterior", "--map", map, "--prompt", kPrompt, "--mock", "--R", "200", "--out", dir.string()})
                .code,
            0);
  const auto post = (dir / "posterior.json").string();
  ASSERT_EQ(run_cli({"plan", "--map", map, "--posterior", post, "--out", dir.string()}).code, 0);
  const auto r = run_cli({"render", "--map", map, "--posterior", post, "--plan", (dir / "plan.json").string(),
                          "--cell-pixels", "4", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(dir / "overlay.svg").find("<polyline"), std::string::npos);
  EXPECT_EQ(slurp(dir / "field.pgm").rfind("P5\n", 0), 0u);
}

TEST(Cli, AblateMockRowsAndGuards) {
  const auto dir = scratch_dir("cli_ablate");
  const auto map = fixture_path("construction_site.json").string();
  const auto r = run_cli({"ablate", "--map", map, "--prompt", kPrompt, "--mock", "--ks", "1,2,4", "--runs", "3",
                          "--R", "100", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mean/shot [s]"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "ablation.json"));
  std::map<std::string, int> per_class;
  for (const auto& row : j["rows"]) ++per_class[row["class"].get<std::string>()];
  EXPECT_EQ(per_class.size(), 4u);
  for (const auto& [name, n] : per_class) EXPECT_EQ(n, 3) << name;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "latency.json"))["latency"].size(), 3u);

  EXPECT_EQ(run_cli({"ablate", "--map", map, "--prompt", kPrompt, "--mock", "--ks", "", "--out", dir.string()}).code,
            cli::kConfigError);
  cli::RunConfig defaults;
  EXPECT_EQ(defaults.runs, 10);
}

TEST(Cli, DefaultsMatchTheExperimentBundle) {
  cli::RunConfig c;
  EXPECT_EQ(c.bootstrap.resamples, 3000);
  EXPECT_EQ(c.sensor.k, 16);
  EXPECT_DOUBLE_EQ(c.sensor.temperature, 1.0);
  EXPECT_DOUBLE_EQ(c.bootstrap.alpha, 0.1);
  EXPECT_DOUBLE_EQ(c.planner.gamma, 1.5);
  EXPECT_EQ(c.bootstrap.seed, 7u);
}

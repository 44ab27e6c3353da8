#include <gtest/gtest.h>

#include <random>

#include "semplan/errors.hpp"
#include "semplan/eval_metrics.hpp"
#include "support.hpp"

using namespace semplan;

namespace {

SemanticMap site() { return load_map_file(semplan::testing::fixture_path("construction_site.json")); }

std::map<std::string, double> uniform_cvars(const SemanticMap& map, double v) {
  std::map<std::string, double> out;
  for (const auto& n : map.class_names()) out[n] = v;
  return out;
}

}  // namespace

TEST(PathMetrics, SingleVertexPath) {
  const SemanticMap map(6, 6, {{"a", {{0, 0}}, 1.0}}, {3, 4}, {5, 5});
  const auto fields = all_distance_fields(map);
  const auto m = path_metrics({{3, 4}}, map, fields);
  EXPECT_EQ(m.length, 0.0);
  EXPECT_DOUBLE_EQ(m.min_dist, 5.0);
  EXPECT_DOUBLE_EQ(m.avg_dist, 5.0);
  EXPECT_DOUBLE_EQ(m.per_class_min.at("a"), 5.0);
}

TEST(PathMetrics, StraightPathFarFromObstacles) {
  const SemanticMap map(20, 20, {{"a", {{19, 19}}, 1.0}}, {0, 0}, {5, 0});
  const auto fields = all_distance_fields(map);
  std::vector<Cell> path;
  for (int x = 0; x <= 5; ++x) path.push_back({x, 0});
  EXPECT_DOUBLE_EQ(path_metrics(path, map, fields).length, 5.0);
}

TEST(PathMetrics, PathAlongsideAWall) {
  std::vector<Cell> wall;
  for (int x = 0; x < 10; ++x) wall.push_back({x, 3});
  const SemanticMap map(10, 6, {{"wall", wall, 1.0}}, {0, 2}, {9, 2});
  const auto fields = all_distance_fields(map);
  std::vector<Cell> path;
  for (int x = 0; x < 10; ++x) path.push_back({x, 2});
  const auto m = path_metrics(path, map, fields);
  EXPECT_DOUBLE_EQ(m.min_dist, 1.0);
  EXPECT_DOUBLE_EQ(m.avg_dist, 1.0);
}

TEST(PathMetrics, MinDistMatchesBruteForce) {
  std::mt19937_64 gen(71);
  for (int trial = 0; trial < 30; ++trial) {
    const auto map = semplan::testing::random_map(gen, {20, 20, 4, 0.15});
    const auto fields = all_distance_fields(map);
    const auto field = build_cost_field(map, fields, semplan::testing::random_lambdas(gen, map.class_count()), {});
    const auto plan = mhastar(map, field, PlannerConfig{});
    if (!plan.found()) continue;
    double brute = std::numeric_limits<double>::infinity();
    for (const Cell v : plan.path) brute = std::min(brute, semplan::testing::brute_force_clearance(map, v));
    EXPECT_NEAR(path_metrics(plan.path, map, fields).min_dist, brute, 1e-9);
  }
}

TEST(PathMetrics, Guards) {
  const SemanticMap map(4, 4, {{"a", {{0, 0}}, 1.0}}, {3, 3}, {3, 0});
  const auto fields = all_distance_fields(map);
  EXPECT_THROW(path_metrics({}, map, fields), ConfigError);
  EXPECT_THROW(path_metrics({{7, 7}}, map, fields), ConfigError);
}

TEST(CompareMethods, LowRiskStaysNearShortestLength) {
  const auto map = site();
  const auto fields = all_distance_fields(map);
  const auto rows = compare_methods(map, fields, uniform_cvars(map, 0.3), CompareConfig{});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].method, Method::AStarBaseline);
  EXPECT_LE(rows[1].metrics.length, 1.15 * rows[0].metrics.length);
}

TEST(CompareMethods, HighRiskGainsClearance) {
  const auto map = site();
  const auto fields = all_distance_fields(map);
  for (double v : {0.6, 0.8, 1.0}) {
    const auto rows = compare_methods(map, fields, uniform_cvars(map, v), CompareConfig{});
    EXPECT_GT(rows[1].metrics.min_dist, rows[0].metrics.min_dist) << "cvar=" << v;
  }
}

TEST(CompareMethods, FixedCostIgnoresThePosterior) {
  const auto map = site();
  const auto fields = all_distance_fields(map);
  const auto lo = compare_methods(map, fields, uniform_cvars(map, 0.1), CompareConfig{});
  const auto hi = compare_methods(map, fields, uniform_cvars(map, 0.9), CompareConfig{});
  EXPECT_EQ(lo[2].plan.path, hi[2].plan.path);
  EXPECT_EQ(lo[2].metrics, hi[2].metrics);
  EXPECT_EQ(lo[0].metrics, hi[0].metrics);
}

TEST(CompareMethods, GammaZeroMatchesBaselineRow) {
  const auto map = site();
  const auto fields = all_distance_fields(map);
  CompareConfig cfg;
  cfg.planner.gamma = 0.0;
  const auto rows = compare_methods(map, fields, uniform_cvars(map, 0.7), cfg);
  EXPECT_EQ(rows[1].plan.path, rows[0].plan.path);
  EXPECT_EQ(rows[1].metrics, rows[0].metrics);
  EXPECT_EQ(rows[1].plan.combined_cost, rows[0].plan.combined_cost);
}

TEST(CompareMethods, TableAndJson) {
  const auto map = site();
  const auto rows = compare_methods(map, all_distance_fields(map), uniform_cvars(map, 0.5), CompareConfig{});
  const auto table = metrics_table(rows);
  EXPECT_NE(table.find("Min. Dist."), std::string::npos);
  EXPECT_NE(table.find("A* path"), std::string::npos);
  EXPECT_NE(table.find("Fixed-cost"), std::string::npos);
  const auto j = metrics_rows_to_json(rows);
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[1]["method"], "Ours");
}

TEST(CompareMethods, NoPathIsReported) {
  std::vector<Cell> wall;
  for (int y = 0; y < 5; ++y) wall.push_back({2, y});
  const SemanticMap map(5, 5, {{"w", wall, 1.0}}, {0, 0}, {4, 4});
  EXPECT_THROW(compare_methods(map, all_distance_fields(map), {{"w", 0.5}}, CompareConfig{}), PlanningError);
}

// ---------------------------------------------------------------------------
// Ablation

namespace {

const Prompt kAblate("busy shift", {"crane", "forklift"});

ShotSampler beta_sampler(double a, double b) {
  return [a, b](int k, std::uint64_t seed) { return sample_mock(seed, kAblate, k, {}, {a, b}); };
}

}  // namespace

TEST(Ablation, DispersionShrinksWithShots) {
  BootstrapConfig cfg;
  cfg.resamples = 500;
  const auto report = ablate_shots(kAblate, {1, 16}, 20, beta_sampler(5, 5), cfg, 3);
  for (const auto& name : kAblate.class_names()) {
    const auto& d = report.dispersion.at(name);
    ASSERT_TRUE(d[0] && d[1]);
    EXPECT_LT(*d[1], *d[0]) << name;
  }
}

TEST(Ablation, ShapeAndDegenerateCases) {
  BootstrapConfig cfg;
  cfg.resamples = 50;
  const auto one = ablate_shots(kAblate, {1, 2, 4}, 1, beta_sampler(2, 2), cfg);
  EXPECT_EQ(ablation_to_json(one, kAblate.class_names()).size(), 6u);
  for (const auto& [name, d] : one.dispersion) {
    for (const auto& x : d) EXPECT_FALSE(x.has_value());
  }

  ShotSampler constant = [](int k, std::uint64_t) {
    SampleSet s;
    s.k = k;
    for (const auto& n : kAblate.class_names()) s.per_class.emplace_back(n, std::vector<double>(k, 0.3));
    return s;
  };
  const auto flat = ablate_shots(kAblate, {1, 4}, 5, constant, cfg);
  for (const auto& [name, d] : flat.dispersion) {
    for (const auto& x : d) EXPECT_NEAR(x.value(), 0.0, 1e-15);
  }

  EXPECT_THROW(ablate_shots(kAblate, {}, 5, constant, cfg), ConfigError);
  EXPECT_THROW(ablate_shots(kAblate, {1}, 0, constant, cfg), ConfigError);
  EXPECT_THROW(ablate_shots(kAblate, {0}, 2, constant, cfg), ConfigError);
}

TEST(Ablation, Deterministic) {
  BootstrapConfig cfg;
  cfg.resamples = 100;
  const auto a = ablate_shots(kAblate, {1, 8}, 4, beta_sampler(5, 5), cfg, 11);
  const auto b = ablate_shots(kAblate, {1, 8}, 4, beta_sampler(5, 5), cfg, 11);
  EXPECT_EQ(ablation_to_json(a, kAblate.class_names()).dump(), ablation_to_json(b, kAblate.class_names()).dump());
}

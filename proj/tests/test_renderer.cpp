#include <gtest/gtest.h>

#include <random>
#include <regex>

#include "semplan/errors.hpp"
#include "semplan/renderer.hpp"
#include "support.hpp"

using namespace semplan;

namespace {

// Mean gray level of free cells within Chebyshev distance 3 of a class.
double neighbourhood_intensity(const SemanticMap& map, const std::vector<std::uint8_t>& px, std::size_t cls) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < map.cell_count(); ++i) {
    const Cell c = map.cell_at(i);
    if (map.is_obstacle(c)) continue;
    bool near = false;
    for (const Cell o : map.classes()[cls].cells) {
      if (std::max(std::abs(o.x - c.x), std::abs(o.y - c.y)) <= 3) {
        near = true;
        break;
      }
    }
    if (!near) continue;
    sum += px[i];
    ++n;
  }
  return sum / n;
}

}  // namespace

TEST(Renderer, ZeroFieldIsUniform) {
  const auto map = load_map_file(semplan::testing::fixture_path("construction_site.json"));
  const auto field = build_cost_field(map, all_distance_fields(map), std::vector<double>(4, 0.0), {});
  const auto px = field_intensity(field);
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (!map.is_obstacle(map.cell_at(i))) ASSERT_EQ(px[i], 0);
  }
}

TEST(Renderer, LowRiskClassRendersDimmer) {
  const auto map = load_map_file(semplan::testing::fixture_path("construction_site.json"));
  // workstation, crane, barrier, forklift
  const auto field = build_cost_field(map, all_distance_fields(map), {0.776, 0.626, 0.440, 0.177}, {});
  const auto px = field_intensity(field);
  EXPECT_LT(neighbourhood_intensity(map, px, 3), neighbourhood_intensity(map, px, 1));
}

TEST(Renderer, IntensityMonotoneInPhi) {
  std::mt19937_64 gen(81);
  for (int trial = 0; trial < 20; ++trial) {
    const auto map = semplan::testing::random_map(gen, {20, 20, 4, 0.1});
    const auto field =
        build_cost_field(map, all_distance_fields(map), semplan::testing::random_lambdas(gen, map.class_count()), {});
    const auto px = field_intensity(field);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (!field.blocked(map.cell_at(i))) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return field.phi_grid()[a] < field.phi_grid()[b]; });
    for (std::size_t i = 1; i < order.size(); ++i) ASSERT_LE(px[order[i - 1]], px[order[i]]);
  }
}

TEST(Renderer, SvgContentAndDeterminism) {
  const auto map = load_map_file(semplan::testing::fixture_path("construction_site.json"));
  const auto fields = all_distance_fields(map);
  const auto field = build_cost_field(map, fields, {0.6, 0.72, 0.437, 0.741}, {});
  const auto plan = mhastar(map, field, PlannerConfig{});
  RenderSpec spec{map, field, {{"Ours", plan.path, "#3cb44b"}}, 6, "{\"seed\":7}"};
  const auto svg = render_overlay_svg(spec);
  EXPECT_EQ(svg, render_overlay_svg(spec));
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("phi_max="), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find(">forklift</text>"), std::string::npos);
  EXPECT_NE(svg.find("<metadata>{&quot;seed&quot;:7}</metadata>"), std::string::npos);

  // Every polyline vertex lies inside the map area of the image.
  const std::regex pts("points=\"([^\"]*)\"");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, pts));
  std::istringstream ss(m[1].str());
  std::string pair;
  while (ss >> pair) {
    const auto comma = pair.find(',');
    const double x = std::stod(pair.substr(0, comma));
    const double y = std::stod(pair.substr(comma + 1));
    EXPECT_GE(x, 0.0);
    EXPECT_GE(y, 0.0);
    EXPECT_LE(x, map.width() * 6.0);
    EXPECT_LE(y, map.height() * 6.0);
  }
}

TEST(Renderer, PgmDimensionsAndGuards) {
  const SemanticMap map(4, 3, {{"a", {{0, 0}}, 1.0}}, {3, 0}, {3, 2});
  const auto field = build_cost_field(map, all_distance_fields(map), {1.0}, {});
  RenderSpec spec{map, field, {}, 2, ""};
  const auto pgm = render_field_pgm(spec);
  EXPECT_NE(pgm.find("\n8 6\n255\n"), std::string::npos);
  EXPECT_EQ(static_cast<unsigned char>(pgm[pgm.size() - 48]), 255);

  RenderSpec bad_px{map, field, {}, 0, ""};
  EXPECT_THROW(render_overlay_svg(bad_px), ConfigError);
  RenderSpec outside{map, field, {{"p", {{9, 9}}, "red"}}, 2, ""};
  EXPECT_THROW(render_overlay_svg(outside), ConfigError);
}

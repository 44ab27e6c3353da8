#pragma once

// Shared helpers and independent oracles for the test binaries.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "semplan/cost_field.hpp"
#include "semplan/planner.hpp"
#include "semplan/semantic_map.hpp"

namespace semplan::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(SEMPLAN_FIXTURE_DIR) / name;
}

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  auto dir = std::filesystem::temp_directory_path() /
             ("semplan_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RandomMapOptions {
  int width = 20;
  int height = 20;
  int max_classes = 5;
  double density = 0.2;
};

/// Random obstacle map with up to `max_classes` classes. Start and goal are
/// kept free; connectivity is not guaranteed.
inline SemanticMap random_map(std::mt19937_64& gen, const RandomMapOptions& opt = {}) {
  std::uniform_int_distribution<int> nclass(1, opt.max_classes);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int c = nclass(gen);
  const Cell start{0, 0};
  const Cell goal{opt.width - 1, opt.height - 1};
  std::vector<ObstacleClass> classes(static_cast<std::size_t>(c));
  for (int i = 0; i < c; ++i) classes[static_cast<std::size_t>(i)].name = "class" + std::to_string(i);
  std::uniform_int_distribution<int> pick(0, c - 1);
  for (int y = 0; y < opt.height; ++y) {
    for (int x = 0; x < opt.width; ++x) {
      const Cell cell{x, y};
      if (cell == start || cell == goal) continue;
      if (u(gen) < opt.density) classes[static_cast<std::size_t>(pick(gen))].cells.push_back(cell);
    }
  }
  // A class needs at least one cell; park empties on a free interior cell if any.
  std::vector<ObstacleClass> kept;
  for (auto& cls : classes) {
    if (!cls.cells.empty()) kept.push_back(std::move(cls));
  }
  if (kept.empty()) {
    ObstacleClass only{"class0", {{opt.width / 2, opt.height / 2}}, 1.0};
    if (only.cells[0] == start || only.cells[0] == goal) only.cells[0] = {1, 0};
    kept.push_back(std::move(only));
  }
  return SemanticMap(opt.width, opt.height, std::move(kept), start, goal);
}

inline std::vector<double> random_lambdas(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = u(gen);
  return out;
}

/// O(N*M) minimum Euclidean distance to the cells of one class.
inline std::vector<double> brute_force_distance(const SemanticMap& map, std::size_t class_index) {
  const auto& cells = map.classes()[class_index].cells;
  std::vector<double> out(map.cell_count(), std::numeric_limits<double>::infinity());
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (const Cell o : cells) best = std::min(best, std::hypot(double(x - o.x), double(y - o.y)));
      out[map.index({x, y})] = best;
    }
  }
  return out;
}

/// Brute-force clearance: nearest obstacle cell of any class.
inline double brute_force_clearance(const SemanticMap& map, Cell c) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& cls : map.classes()) {
    for (const Cell o : cls.cells) best = std::min(best, std::hypot(double(c.x - o.x), double(c.y - o.y)));
  }
  return best;
}

/// Phi straight from its definition, without distance fields.
inline double brute_force_phi(const SemanticMap& map, const std::vector<double>& lambdas, Cell c) {
  if (map.is_obstacle(c)) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < map.class_count(); ++i) {
    double d = std::numeric_limits<double>::infinity();
    for (const Cell o : map.classes()[i].cells) d = std::min(d, std::hypot(double(c.x - o.x), double(c.y - o.y)));
    sum += lambdas[i] * std::exp(-d);
  }
  return sum;
}

/// One-sample Kolmogorov-Smirnov statistic against Uniform(0, 1).
inline double ks_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = std::clamp(xs[i], 0.0, 1.0);
    d = std::max({d, double(i + 1) / n - f, f - double(i) / n});
  }
  return d;
}

/// Every directed edge of the grid graph, for exhaustive checks.
template <class Fn>
void for_each_edge(const SemanticMap& map, const CostField& field, Connectivity conn, Fn&& fn) {
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const Cell from{x, y};
      if (field.blocked(from)) continue;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const Cell to{x + dx, y + dy};
          if (!is_edge(field, from, to, conn)) continue;
          fn(from, to);
        }
      }
    }
  }
}

}  // namespace semplan::testing

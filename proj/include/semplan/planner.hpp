#pragma once

// Grid search over c(s, s') = step(s, s') + gamma * phi(s').
//
// Obstacle cells are untraversable and diagonal moves may not cut between two
// orthogonally adjacent blocked cells. The anchor heuristic (straight-line
// distance) is consistent for this cost, so the anchor queue of the
// multi-heuristic search bounds the returned cost by w1 * w2 times optimal.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "semplan/cost_field.hpp"
#include "semplan/semantic_map.hpp"

namespace semplan {

enum class Connectivity { Four = 4, Eight = 8 };

struct PlannerConfig {
  double gamma = 1.5;
  Connectivity connectivity = Connectivity::Eight;
  /// Heuristic inflation.
  double w1 = 1.0;
  /// Auxiliary-queue admission factor relative to the anchor minimum key.
  double w2 = 1.0;
  /// Sampling step of the auxiliary line integral, in cells.
  double delta_ell = 0.5;
  PhiMode aux_phi_mode = PhiMode::ExactSum;

  void validate() const;
};

enum class PlanStatus { Found, NoPath };

struct ExpansionCounts {
  std::size_t anchor = 0;
  std::size_t aux = 0;

  std::size_t total() const noexcept { return anchor + aux; }
};

struct PlanResult {
  std::vector<Cell> path;
  double combined_cost = std::numeric_limits<double>::infinity();
  double geometric_length = 0.0;
  ExpansionCounts expansions;
  PlanStatus status = PlanStatus::NoPath;

  bool found() const noexcept { return status == PlanStatus::Found; }
};

/// 1 for orthogonal neighbours, sqrt(2) for diagonal ones.
double step_length(Cell from, Cell to) noexcept;

/// True when (from, to) is a traversable edge under the connectivity rules.
bool is_edge(const CostField& field, Cell from, Cell to, Connectivity connectivity) noexcept;

/// Throws PlanningError for non-edges (non-adjacent, blocked target, corner cut).
double edge_cost(Cell from, Cell to, const CostField& field, const PlannerConfig& config);

inline double anchor_heuristic(Cell cell, Cell goal) noexcept {
  return std::hypot(double(cell.x - goal.x), double(cell.y - goal.y));
}

/// Accumulates f(x_l) for x_l = a + (l / L)(b - a), l = 1..L, L = ceil(|b - a| / step),
/// calling stop(partial) after each term. Returns the final sum times step, or
/// nullopt as soon as stop returns true. Zero when a == b.
template <class Fn, class Stop>
std::optional<double> riemann_line_sum_until(double ax, double ay, double bx, double by, double step, Fn&& f,
                                             Stop&& stop) {
  const double length = std::hypot(bx - ax, by - ay);
  if (length == 0.0) return 0.0;
  const auto samples = static_cast<long>(std::ceil(length / step));
  double sum = 0.0;
  for (long l = 1; l <= samples; ++l) {
    const double t = double(l) / double(samples);
    sum += f(ax + t * (bx - ax), ay + t * (by - ay));
    if (stop(sum)) return std::nullopt;
  }
  return sum * step;
}

/// sum_{l=1..L} f(x_l) * step with L = ceil(|b - a| / step) points
/// x_l = a + (l / L)(b - a). Zero when a == b.
template <class Fn>
double riemann_line_sum(double ax, double ay, double bx, double by, double step, Fn&& f) {
  return *riemann_line_sum_until(ax, ay, bx, by, step, std::forward<Fn>(f), [](double) { return false; });
}

/// gamma times the Riemann sum of phi along the straight segment to the goal.
double aux_heuristic(Cell cell, Cell goal, const CostField& field, const PlannerConfig& config);

/// Single-queue search keyed by g + w1 * h0.
PlanResult astar(const SemanticMap& map, const CostField& field, const PlannerConfig& config);

/// Shared-open multi-heuristic A*: anchor queue keyed by g + w1 * h0, one
/// auxiliary queue keyed by g + w1 * (h0 + h_aux).
PlanResult mhastar(const SemanticMap& map, const CostField& field, const PlannerConfig& config);

/// Uniform-cost search; ground truth for the optimality checks.
PlanResult dijkstra_oracle(const SemanticMap& map, const CostField& field, const PlannerConfig& config);

double path_length(const std::vector<Cell>& path) noexcept;

nlohmann::ordered_json plan_to_json(const PlanResult& plan);

}  // namespace semplan

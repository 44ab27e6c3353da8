#include "semplan/planner.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <queue>

#include <fmt/format.h>

#include "semplan/errors.hpp"

namespace semplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

struct Move {
  int dx;
  int dy;
};
constexpr std::array<Move, 8> kMoves = {{{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};

std::size_t move_count(Connectivity c) { return c == Connectivity::Four ? 4 : 8; }

void check_inputs(const SemanticMap& map, const CostField& field, const PlannerConfig& config) {
  config.validate();
  if (field.width() != map.width() || field.height() != map.height()) {
    throw ConfigError(fmt::format("cost field is {}x{} but the map is {}x{}", field.width(),
                                  field.height(), map.width(), map.height()));
  }
}

}  // namespace

void PlannerConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be a finite value >= 0");
  if (!(w1 >= 1.0)) throw ConfigError(fmt::format("w1 must be >= 1, got {}", w1));
  if (!(w2 >= 1.0)) throw ConfigError(fmt::format("w2 must be >= 1, got {}", w2));
  if (!(delta_ell > 0.0)) throw ConfigError(fmt::format("delta_ell must be > 0, got {}", delta_ell));
  if (connectivity != Connectivity::Four && connectivity != Connectivity::Eight) {
    throw ConfigError("connectivity must be 4 or 8");
  }
}

double step_length(Cell from, Cell to) noexcept {
  return (from.x != to.x && from.y != to.y) ? kSqrt2 : 1.0;
}

bool is_edge(const CostField& field, Cell from, Cell to, Connectivity connectivity) noexcept {
  const int dx = to.x - from.x;
  const int dy = to.y - from.y;
  if (std::abs(dx) > 1 || std::abs(dy) > 1 || (dx == 0 && dy == 0)) return false;
  if (!field.in_bounds(from) || !field.in_bounds(to) || field.blocked(to)) return false;
  if (dx != 0 && dy != 0) {
    if (connectivity == Connectivity::Four) return false;
    if (field.blocked({from.x + dx, from.y}) || field.blocked({from.x, from.y + dy})) return false;
  }
  return true;
}

double edge_cost(Cell from, Cell to, const CostField& field, const PlannerConfig& config) {
  if (!is_edge(field, from, to, config.connectivity)) {
    if (field.in_bounds(to) && field.blocked(to)) {
      throw PlanningError(fmt::format("target ({},{}) is an obstacle cell", to.x, to.y));
    }
    throw PlanningError(fmt::format("({},{}) -> ({},{}) is not a traversable edge", from.x, from.y,
                                    to.x, to.y));
  }
  return step_length(from, to) + config.gamma * field.phi(to);
}

double aux_heuristic(Cell cell, Cell goal, const CostField& field, const PlannerConfig& config) {
  if (cell == goal || config.gamma == 0.0) return 0.0;
  const PhiMode mode = config.aux_phi_mode;
  const double sum = riemann_line_sum(cell.x, cell.y, goal.x, goal.y, config.delta_ell,
                                      [&](double x, double y) { return field.phi_at_point(x, y, mode); });
  return config.gamma * sum;
}

double path_length(const std::vector<Cell>& path) noexcept {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += step_length(path[i - 1], path[i]);
  return len;
}

// ---------------------------------------------------------------------------
// Shared-open search engine

namespace {

struct Entry {
  double key;
  double g;
  std::uint32_t index;
};

class SearchEngine {
public:
  SearchEngine(const SemanticMap& map, const CostField& field, const PlannerConfig& config, bool with_aux)
      : map_(map),
        field_(field),
        config_(config),
        with_aux_(with_aux),
        n_(map.cell_count()),
        goal_(map.goal()),
        g_(n_, kInf),
        h0_(n_, -1.0),
        haux_(n_, -1.0),
        parent_(n_, kNoParent),
        flags_(n_, 0) {}

  PlanResult run() {
    const auto start = static_cast<std::uint32_t>(map_.index(map_.start()));
    const auto goal = static_cast<std::uint32_t>(map_.index(goal_));
    g_[start] = 0.0;
    push_anchor(start);
    if (with_aux_) push_aux(start);

    PlanResult result;
    for (;;) {
      const double anchor_min = min_key(anchor_, kOpenAnchor);
      if (anchor_min == kInf) break;
      if (with_aux_) {
        const double aux_min = min_key(aux_, kOpenAux);
        if (aux_min <= config_.w2 * anchor_min) {
          if (g_[goal] <= aux_min) return finish(result, goal);
          const auto s = pop(aux_, kOpenAux);
          expand(s);
          flags_[s] |= kClosedAux;
          ++result.expansions.aux;
          continue;
        }
      }
      if (g_[goal] <= anchor_min) return finish(result, goal);
      const auto s = pop(anchor_, kOpenAnchor);
      expand(s);
      flags_[s] |= kClosedAnchor;
      ++result.expansions.anchor;
    }
    if (g_[goal] < kInf) return finish(result, goal);
    result.status = PlanStatus::NoPath;
    return result;
  }

private:
  static constexpr std::uint8_t kOpenAnchor = 1;
  static constexpr std::uint8_t kOpenAux = 2;
  static constexpr std::uint8_t kClosedAnchor = 4;
  static constexpr std::uint8_t kClosedAux = 8;

  // Min-heap order: smaller key, then larger g, then lexicographic (x, y).
  struct Worse {
    int width;
    bool operator()(const Entry& a, const Entry& b) const noexcept {
      if (a.key != b.key) return a.key > b.key;
      if (a.g != b.g) return a.g < b.g;
      const int ax = static_cast<int>(a.index % static_cast<std::uint32_t>(width));
      const int bx = static_cast<int>(b.index % static_cast<std::uint32_t>(width));
      if (ax != bx) return ax > bx;
      return a.index > b.index;
    }
  };
  using Heap = std::priority_queue<Entry, std::vector<Entry>, Worse>;

  double h0(std::uint32_t s) {
    if (h0_[s] < 0.0) h0_[s] = anchor_heuristic(map_.cell_at(s), goal_);
    return h0_[s];
  }
  double haux(std::uint32_t s) {
    if (haux_[s] < 0.0) haux_[s] = aux_heuristic(map_.cell_at(s), goal_, field_, config_);
    return haux_[s];
  }
  double anchor_key(std::uint32_t s) { return g_[s] + config_.w1 * h0(s); }
  double aux_key(std::uint32_t s) { return g_[s] + config_.w1 * (h0(s) + haux(s)); }

  // Same outcome as aux_key(s) <= w2 * anchor_key(s). The Riemann terms are
  // nonnegative and every operation that turns the running sum into a key is
  // monotone in floating point, so once a partial sum already pushes the key
  // past the bound the full sum would too and sampling can stop there.
  bool aux_admits(std::uint32_t s) {
    const double bound = config_.w2 * anchor_key(s);
    if (haux_[s] >= 0.0) return aux_key(s) <= bound;
    const Cell c = map_.cell_at(s);
    if (c == goal_) return aux_key(s) <= bound;
    const double g = g_[s];
    const double h = h0(s);
    const double step = config_.delta_ell;
    const PhiMode mode = config_.aux_phi_mode;
    const auto sum = riemann_line_sum_until(
        c.x, c.y, goal_.x, goal_.y, step, [&](double x, double y) { return field_.phi_at_point(x, y, mode); },
        [&](double partial) { return g + config_.w1 * (h + config_.gamma * (partial * step)) > bound; });
    if (!sum) return false;
    haux_[s] = config_.gamma * *sum;
    return aux_key(s) <= bound;
  }

  void push_anchor(std::uint32_t s) {
    anchor_.push({anchor_key(s), g_[s], s});
    flags_[s] |= kOpenAnchor;
  }
  void push_aux(std::uint32_t s) {
    aux_.push({aux_key(s), g_[s], s});
    flags_[s] |= kOpenAux;
  }

  // Entries are stale once the node left that open list or its g improved.
  bool live(const Entry& e, std::uint8_t open_flag) const noexcept {
    return (flags_[e.index] & open_flag) && e.g == g_[e.index];
  }
  double min_key(Heap& heap, std::uint8_t open_flag) {
    while (!heap.empty() && !live(heap.top(), open_flag)) heap.pop();
    return heap.empty() ? kInf : heap.top().key;
  }
  std::uint32_t pop(Heap& heap, std::uint8_t open_flag) {
    min_key(heap, open_flag);
    const auto s = heap.top().index;
    heap.pop();
    return s;
  }

  void expand(std::uint32_t s) {
    flags_[s] &= static_cast<std::uint8_t>(~(kOpenAnchor | kOpenAux));
    const Cell c = map_.cell_at(s);
    const double gs = g_[s];
    for (std::size_t m = 0; m < move_count(config_.connectivity); ++m) {
      const Cell t{c.x + kMoves[m].dx, c.y + kMoves[m].dy};
      if (!field_.in_bounds(t) || field_.blocked(t)) continue;
      if (m >= 4 && (field_.blocked({t.x, c.y}) || field_.blocked({c.x, t.y}))) continue;
      const auto ti = static_cast<std::uint32_t>(map_.index(t));
      const double cand = gs + (m >= 4 ? kSqrt2 : 1.0) + config_.gamma * field_.phi(t);
      if (!(cand < g_[ti])) continue;
      g_[ti] = cand;
      parent_[ti] = s;
      if (flags_[ti] & kClosedAnchor) continue;
      push_anchor(ti);
      if (!with_aux_ || (flags_[ti] & kClosedAux)) continue;
      if (aux_admits(ti)) {
        push_aux(ti);
      } else {
        flags_[ti] &= static_cast<std::uint8_t>(~kOpenAux);
      }
    }
  }

  PlanResult& finish(PlanResult& result, std::uint32_t goal) {
    result.status = PlanStatus::Found;
    for (std::uint32_t s = goal; s != kNoParent; s = parent_[s]) result.path.push_back(map_.cell_at(s));
    std::reverse(result.path.begin(), result.path.end());
    // A node re-parented after its successors were generated leaves g(goal)
    // above the cost of the extracted path, so report the path's own cost.
    // The accumulation order matches expand(), so a consistent chain gives g(goal) exactly.
    double cost = 0.0;
    for (std::size_t i = 1; i < result.path.size(); ++i) {
      const Cell a = result.path[i - 1];
      const Cell b = result.path[i];
      cost = cost + (a.x != b.x && a.y != b.y ? kSqrt2 : 1.0) + config_.gamma * field_.phi(b);
    }
    result.combined_cost = cost;
    result.geometric_length = path_length(result.path);
    return result;
  }

  const SemanticMap& map_;
  const CostField& field_;
  const PlannerConfig& config_;
  bool with_aux_;
  std::size_t n_;
  Cell goal_;
  std::vector<double> g_;
  std::vector<double> h0_;
  std::vector<double> haux_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> flags_;
  Heap anchor_{Worse{map_.width()}};
  Heap aux_{Worse{map_.width()}};
};

}  // namespace

PlanResult astar(const SemanticMap& map, const CostField& field, const PlannerConfig& config) {
  check_inputs(map, field, config);
  return SearchEngine(map, field, config, false).run();
}

PlanResult mhastar(const SemanticMap& map, const CostField& field, const PlannerConfig& config) {
  check_inputs(map, field, config);
  // With gamma = 0 the auxiliary heuristic is identically zero and its queue
  // would only mirror the anchor; dropping it makes the result equal to A*.
  return SearchEngine(map, field, config, config.gamma > 0.0).run();
}

// ---------------------------------------------------------------------------
// Oracle: written without the engine so it can check it.

PlanResult dijkstra_oracle(const SemanticMap& map, const CostField& field, const PlannerConfig& config) {
  check_inputs(map, field, config);
  const std::size_t n = map.cell_count();
  std::vector<double> dist(n, kInf);
  std::vector<std::size_t> parent(n, n);
  std::vector<bool> done(n, false);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;

  const std::size_t start = map.index(map.start());
  const std::size_t goal = map.index(map.goal());
  dist[start] = 0.0;
  pq.push({0.0, start});
  PlanResult result;
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = true;
    ++result.expansions.anchor;
    if (u == goal) break;
    const Cell cu = map.cell_at(u);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Cell cv{cu.x + dx, cu.y + dy};
        if (!is_edge(field, cu, cv, config.connectivity)) continue;
        const std::size_t v = map.index(cv);
        const double nd = d + edge_cost(cu, cv, field, config);
        if (nd < dist[v]) {
          dist[v] = nd;
          parent[v] = u;
          pq.push({nd, v});
        }
      }
    }
  }
  if (dist[goal] == kInf) return result;
  result.status = PlanStatus::Found;
  result.combined_cost = dist[goal];
  for (std::size_t s = goal; s != n; s = parent[s]) result.path.push_back(map.cell_at(s));
  std::reverse(result.path.begin(), result.path.end());
  result.geometric_length = path_length(result.path);
  return result;
}

nlohmann::ordered_json plan_to_json(const PlanResult& plan) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json path = nlohmann::ordered_json::array();
  for (const Cell c : plan.path) path.push_back({c.x, c.y});
  j["path"] = std::move(path);
  j["combined_cost"] = plan.found() ? nlohmann::ordered_json(plan.combined_cost) : nullptr;
  j["geometric_length"] = plan.geometric_length;
  j["expansions"] = {{"anchor", plan.expansions.anchor}, {"aux", plan.expansions.aux}};
  j["status"] = plan.found() ? "found" : "no_path";
  return j;
}

}  // namespace semplan

#include "semplan/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <fmt/format.h>

#include "semplan/errors.hpp"

namespace semplan {

PathMetrics path_metrics(const std::vector<Cell>& path, const SemanticMap& map,
                         const DistanceFields& fields) {
  if (path.empty()) throw ConfigError("path metrics of an empty path");
  if (fields.size() != map.class_count()) {
    throw ConfigError("distance fields do not cover every class of the map");
  }
  PathMetrics m;
  m.length = path_length(path);
  for (const auto& f : fields) m.per_class_min[f.class_name] = std::numeric_limits<double>::infinity();
  m.min_dist = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const Cell c : path) {
    if (!map.in_bounds(c)) throw ConfigError(fmt::format("path vertex ({},{}) is out of bounds", c.x, c.y));
    for (const auto& f : fields) {
      auto& slot = m.per_class_min[f.class_name];
      slot = std::min(slot, f.at(c));
    }
    const double clearance = min_clearance_at(map, fields, c);
    m.min_dist = std::min(m.min_dist, clearance);
    sum += clearance;
  }
  m.avg_dist = sum / double(path.size());
  return m;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::AStarBaseline: return "A* path";
    case Method::Ours: return "Ours";
    case Method::FixedCost: return "Fixed-cost";
  }
  return "?";
}

std::map<std::string, double> cvars_of(const std::map<std::string, PosteriorSummary>& posteriors) {
  std::map<std::string, double> out;
  for (const auto& [name, p] : posteriors) out.emplace(name, p.cvar_alpha);
  return out;
}

std::vector<MethodRow> compare_methods(const SemanticMap& map, const DistanceFields& fields,
                                       const std::map<std::string, double>& cvars,
                                       const CompareConfig& config) {
  const auto shared = std::make_shared<const DistanceFields>(fields);
  CostFieldConfig field_config;
  field_config.gamma = config.planner.gamma;

  const CostField ours_field = build_cost_field(map, shared, scale_lambdas(map.classes(), cvars), field_config);
  std::map<std::string, double> fixed;
  for (const auto& cls : map.classes()) fixed[cls.name] = config.fixed_weight;
  const CostField fixed_field = build_cost_field(map, shared, scale_lambdas(map.classes(), fixed), field_config);

  PlannerConfig baseline = config.planner;
  baseline.gamma = 0.0;

  std::vector<MethodRow> rows;
  auto add = [&](Method method, PlanResult plan) {
    if (!plan.found()) throw PlanningError(method_name(method) + ": no path between start and goal");
    MethodRow row;
    row.method = method;
    row.metrics = path_metrics(plan.path, map, fields);
    row.plan = std::move(plan);
    rows.push_back(std::move(row));
  };
  add(Method::AStarBaseline, astar(map, ours_field, baseline));
  add(Method::Ours, mhastar(map, ours_field, config.planner));
  add(Method::FixedCost, mhastar(map, fixed_field, config.planner));
  return rows;
}

std::vector<MethodRow> compare_methods(const SemanticMap& map, const DistanceFields& fields,
                                       const std::map<std::string, PosteriorSummary>& posteriors,
                                       const CompareConfig& config) {
  return compare_methods(map, fields, cvars_of(posteriors), config);
}

std::string metrics_table(const std::vector<MethodRow>& rows) {
  std::string out = fmt::format("{:<12} {:>9} {:>11} {:>11}\n", "Method", "Length", "Min. Dist.", "Avg. Dist.");
  for (const auto& r : rows) {
    out += fmt::format("{:<12} {:>9.2f} {:>11.2f} {:>11.2f}\n", method_name(r.method), r.metrics.length,
                       r.metrics.min_dist, r.metrics.avg_dist);
  }
  return out;
}

nlohmann::ordered_json metrics_to_json(const PathMetrics& m) {
  nlohmann::ordered_json j;
  j["length"] = m.length;
  j["min_dist"] = m.min_dist;
  j["avg_dist"] = m.avg_dist;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [name, v] : m.per_class_min) per[name] = v;
  j["per_class_min"] = std::move(per);
  return j;
}

nlohmann::ordered_json metrics_rows_to_json(const std::vector<MethodRow>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["method"] = method_name(r.method);
    j["metrics"] = metrics_to_json(r.metrics);
    j["combined_cost"] = r.plan.combined_cost;
    j["expansions"] = {{"anchor", r.plan.expansions.anchor}, {"aux", r.plan.expansions.aux}};
    out.push_back(std::move(j));
  }
  return out;
}

AblationReport ablate_shots(const Prompt& prompt, const std::vector<int>& ks, int runs,
                            const ShotSampler& sampler, const BootstrapConfig& config,
                            std::uint64_t sampler_seed) {
  if (ks.empty()) throw ConfigError("ablation needs at least one shot count");
  if (runs < 1) throw ConfigError("ablation needs at least one run per shot count");
  config.validate();

  AblationReport report;
  report.ks = ks;
  report.runs = runs;
  for (const auto& name : prompt.class_names()) {
    report.per_k_cvar[name].assign(ks.size(), {});
    report.dispersion[name].assign(ks.size(), std::nullopt);
  }
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    if (ks[ki] < 1) throw ConfigError(fmt::format("shot count must be >= 1, got {}", ks[ki]));
    for (int r = 0; r < runs; ++r) {
      const auto run_seed = substream_seed(substream_seed(sampler_seed, static_cast<std::uint64_t>(ks[ki])),
                                           static_cast<std::uint64_t>(r));
      const SampleSet set = sampler(ks[ki], run_seed);
      const auto posteriors = posterior_for_all_classes(set, config);
      for (const auto& name : prompt.class_names()) {
        auto it = posteriors.find(name);
        if (it == posteriors.end()) throw ConfigError("sampler returned no readings for '" + name + "'");
        report.per_k_cvar[name][ki].push_back(it->second.cvar_alpha);
      }
    }
    if (runs < 2) continue;
    for (const auto& name : prompt.class_names()) {
      const auto& xs = report.per_k_cvar[name][ki];
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= double(xs.size());
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      report.dispersion[name][ki] = std::sqrt(ss / double(xs.size() - 1));
    }
  }
  return report;
}

nlohmann::ordered_json ablation_to_json(const AblationReport& report,
                                        const std::vector<std::string>& order) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& name : order) {
    auto cv = report.per_k_cvar.find(name);
    auto disp = report.dispersion.find(name);
    if (cv == report.per_k_cvar.end() || disp == report.dispersion.end()) continue;
    for (std::size_t ki = 0; ki < report.ks.size(); ++ki) {
      nlohmann::ordered_json row;
      row["class"] = name;
      row["k"] = report.ks[ki];
      row["runs"] = report.runs;
      row["cvar"] = cv->second[ki];
      const auto& xs = cv->second[ki];
      double mean = 0.0;
      for (double x : xs) mean += x;
      row["cvar_mean"] = xs.empty() ? 0.0 : mean / double(xs.size());
      const auto& d = disp->second[ki];
      row["cvar_std"] = d ? nlohmann::ordered_json(*d) : nullptr;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace semplan

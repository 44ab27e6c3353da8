#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semplan/planner.hpp"
#include "semplan/risk_posterior.hpp"
#include "semplan/semantic_sensor.hpp"

namespace semplan {

struct PathMetrics {
  double length = 0.0;
  /// Clearances are measured at path vertices against every class.
  double min_dist = 0.0;
  double avg_dist = 0.0;
  std::map<std::string, double> per_class_min;

  friend bool operator==(const PathMetrics&, const PathMetrics&) = default;
};

PathMetrics path_metrics(const std::vector<Cell>& path, const SemanticMap& map,
                         const DistanceFields& fields);

enum class Method { AStarBaseline, Ours, FixedCost };

std::string method_name(Method m);

struct CompareConfig {
  PlannerConfig planner;  // gamma used by Ours and FixedCost
  /// Prompt-independent per-class CVaR stand-in for the fixed-cost baseline.
  double fixed_weight = 0.5;
};

struct MethodRow {
  Method method = Method::Ours;
  PlanResult plan;
  PathMetrics metrics;
};

/// A* with gamma = 0, MHA* over the CVaR-scaled field, and MHA* over a field
/// with every CVaR replaced by the fixed weight. Throws PlanningError when a
/// method finds no path.
std::vector<MethodRow> compare_methods(const SemanticMap& map, const DistanceFields& fields,
                                       const std::map<std::string, double>& cvars,
                                       const CompareConfig& config);
std::vector<MethodRow> compare_methods(const SemanticMap& map, const DistanceFields& fields,
                                       const std::map<std::string, PosteriorSummary>& posteriors,
                                       const CompareConfig& config);

std::map<std::string, double> cvars_of(const std::map<std::string, PosteriorSummary>& posteriors);

/// Aligned plain-text table with one row per method.
std::string metrics_table(const std::vector<MethodRow>& rows);
nlohmann::ordered_json metrics_to_json(const PathMetrics& m);
nlohmann::ordered_json metrics_rows_to_json(const std::vector<MethodRow>& rows);

/// Returns the SampleSet for one run with k shots; `run_seed` is unique per (k, run).
using ShotSampler = std::function<SampleSet(int k, std::uint64_t run_seed)>;

struct AblationReport {
  std::vector<int> ks;
  /// label -> one list per k (same order as ks) of CVaRs across runs.
  std::map<std::string, std::vector<std::vector<double>>> per_k_cvar;
  /// label -> per-k sample standard deviation; empty when runs < 2.
  std::map<std::string, std::vector<std::optional<double>>> dispersion;
  int runs = 0;
};

AblationReport ablate_shots(const Prompt& prompt, const std::vector<int>& ks, int runs,
                            const ShotSampler& sampler, const BootstrapConfig& config,
                            std::uint64_t sampler_seed = 0);

nlohmann::ordered_json ablation_to_json(const AblationReport& report,
                                        const std::vector<std::string>& order);

}  // namespace semplan

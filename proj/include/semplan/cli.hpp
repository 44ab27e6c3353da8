#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "semplan/cost_field.hpp"
#include "semplan/planner.hpp"
#include "semplan/risk_posterior.hpp"
#include "semplan/semantic_sensor.hpp"

namespace semplan::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kNoPath = 2,
  kSensorFailure = 3,
  kConfigError = 4,
};

enum class SensorMode { Live, Mock, Cache };
enum class Baseline { None, AStar, FixedCost };

struct MockConfig {
  std::pair<double, double> default_params{2.0, 2.0};
  std::map<std::string, std::pair<double, double>> per_class;
  int delay_ms = 0;
};

struct RunConfig {
  std::filesystem::path map_path;
  std::string prompt_text;
  SensorMode mode = SensorMode::Live;
  std::filesystem::path cache_path;
  std::filesystem::path posterior_path;
  SensorConfig sensor;
  MockConfig mock;
  BootstrapConfig bootstrap;
  CostFieldConfig field;
  PlannerConfig planner;
  std::optional<double> threshold;
  Baseline baseline = Baseline::None;
  double fixed_weight = 0.5;
  std::vector<int> ks{1, 2, 4, 8, 16};
  int runs = 10;
  std::vector<std::filesystem::path> plan_paths;
  int cell_pixels = 8;
  std::filesystem::path out_dir = ".";

  /// Resolved configuration, embedded in every output artifact.
  nlohmann::ordered_json to_json() const;
};

/// Applies the keys present in a config document on top of `config`.
void apply_config_json(RunConfig& config, const nlohmann::json& doc);

/// Entry point behind the `semplan` binary. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semplan::cli

#pragma once

// Bayesian bootstrap over sensor readings and tail-risk summaries.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "semplan/random.hpp"
#include "semplan/semantic_sensor.hpp"

namespace semplan {

enum class StatisticKind { WeightedMean, WeightedQuantile };

struct BootstrapConfig {
  int resamples = 3000;  // R
  double alpha = 0.1;
  std::uint64_t seed = 7;
  StatisticKind statistic = StatisticKind::WeightedMean;
  /// Quantile level when statistic == WeightedQuantile.
  double quantile = 0.5;

  void validate() const;

  friend bool operator==(const BootstrapConfig&, const BootstrapConfig&) = default;
};

struct PosteriorSummary {
  std::string class_name;
  /// One statistic value per resample, in draw order.
  std::vector<double> statistic_samples;
  double mean = 0.0;
  double var_alpha = 0.0;
  double cvar_alpha = 0.0;
  BootstrapConfig config;

  friend bool operator==(const PosteriorSummary&, const PosteriorSummary&) = default;
};

/// k normalized standard-exponential draws: one Dirichlet(1, ..., 1) vector.
std::vector<double> dirichlet_weights(Rng& rng, int k);

struct TailRisk {
  double var_alpha = 0.0;
  double cvar_alpha = 0.0;
};

/// VaR is the smallest value whose cumulative weight reaches alpha; CVaR is
/// the weighted mean of every value >= VaR. Equal values are merged.
/// Empty `weights` means uniform.
TailRisk cvar(std::span<const double> values, std::span<const double> weights, double alpha);
inline TailRisk cvar(std::span<const double> values, double alpha) { return cvar(values, {}, alpha); }

/// Smallest value whose cumulative weight reaches q.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q);

/// R Dirichlet-weighted resamples of `samples`. Samples are sorted
/// internally, so the result does not depend on their order.
PosteriorSummary bootstrap_posterior(std::span<const double> samples, const BootstrapConfig& config,
                                     Rng& rng);
/// Uses a generator seeded with config.seed.
PosteriorSummary bootstrap_posterior(std::span<const double> samples, const BootstrapConfig& config);

/// One summary per class in sample-set order; class i draws from substream i of config.seed.
std::map<std::string, PosteriorSummary> posterior_for_all_classes(const SampleSet& set,
                                                                  const BootstrapConfig& config);

/// { class -> {mean, var_alpha, cvar_alpha, R, alpha, seed} } in `order`.
nlohmann::ordered_json posterior_to_json(const std::map<std::string, PosteriorSummary>& posteriors,
                                         const std::vector<std::string>& order);
/// Reads the export format back; statistic_samples stay empty.
std::map<std::string, PosteriorSummary> posterior_from_json(const nlohmann::json& doc);

}  // namespace semplan

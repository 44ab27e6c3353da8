#include "semplan/risk_posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "semplan/errors.hpp"

namespace semplan {

void BootstrapConfig::validate() const {
  if (resamples < 1) throw ConfigError(fmt::format("resample count R must be >= 1, got {}", resamples));
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError(fmt::format("alpha must lie in (0, 1), got {}", alpha));
  }
  if (statistic == StatisticKind::WeightedQuantile && !(quantile > 0.0 && quantile < 1.0)) {
    throw ConfigError(fmt::format("quantile level must lie in (0, 1), got {}", quantile));
  }
}

std::vector<double> dirichlet_weights(Rng& rng, int k) {
  if (k < 1) throw ConfigError("Dirichlet dimension must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(k));
  double total = 0.0;
  for (double& x : w) {
    x = rng.standard_exponential();
    total += x;
  }
  for (double& x : w) x /= total;
  return w;
}

namespace {

struct Atom {
  double value;
  double weight;
};

// Sorted by value with equal values merged.
std::vector<Atom> merged_atoms(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) throw ConfigError("risk measure of an empty value set");
  if (!weights.empty()) {
    if (weights.size() != values.size()) throw ConfigError("weights and values differ in length");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw ConfigError("weights must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError(fmt::format("weights must sum to 1, got {}", total));
    }
  }
  const double uniform = 1.0 / double(values.size());
  std::vector<Atom> atoms(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) throw ConfigError("risk measure of a NaN value");
    atoms[i] = {values[i], weights.empty() ? uniform : weights[i]};
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
  std::size_t out = 0;
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    if (atoms[i].value == atoms[out].value) {
      atoms[out].weight += atoms[i].weight;
    } else {
      atoms[++out] = atoms[i];
    }
  }
  atoms.resize(out + 1);
  return atoms;
}

// Index of the first atom whose cumulative weight reaches `level`. The 1e-12
// slack absorbs summation round-off only.
std::size_t quantile_index(const std::vector<Atom>& atoms, double level) {
  double cum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    cum += atoms[i].weight;
    if (cum + 1e-12 >= level) return i;
  }
  return atoms.size() - 1;
}

void check_level(double level, const char* what) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ConfigError(fmt::format("{} must lie in (0, 1), got {}", what, level));
  }
}

}  // namespace

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q) {
  check_level(q, "quantile level");
  const auto atoms = merged_atoms(values, weights);
  return atoms[quantile_index(atoms, q)].value;
}

TailRisk cvar(std::span<const double> values, std::span<const double> weights, double alpha) {
  check_level(alpha, "alpha");
  const auto atoms = merged_atoms(values, weights);
  const std::size_t start = quantile_index(atoms, alpha);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = start; i < atoms.size(); ++i) {
    num += atoms[i].weight * atoms[i].value;
    den += atoms[i].weight;
  }
  TailRisk out;
  out.var_alpha = atoms[start].value;
  // A zero-weight tail (possible with explicit weights) degenerates to VaR.
  const double tail = den > 0.0 ? num / den : out.var_alpha;
  out.cvar_alpha = std::clamp(tail, out.var_alpha, atoms.back().value);
  return out;
}

PosteriorSummary bootstrap_posterior(std::span<const double> samples, const BootstrapConfig& config,
                                     Rng& rng) {
  config.validate();
  if (samples.empty()) throw ConfigError("bootstrap posterior of an empty sample list");
  std::vector<double> sorted(samples.begin(), samples.end());
  for (double x : sorted) {
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(fmt::format("sensor reading {} outside [0, 1]", x));
  }
  std::sort(sorted.begin(), sorted.end());
  const int k = static_cast<int>(sorted.size());

  PosteriorSummary summary;
  summary.config = config;
  summary.statistic_samples.reserve(static_cast<std::size_t>(config.resamples));
  for (int r = 0; r < config.resamples; ++r) {
    const auto w = dirichlet_weights(rng, k);
    double stat = 0.0;
    if (config.statistic == StatisticKind::WeightedMean) {
      for (std::size_t i = 0; i < sorted.size(); ++i) stat += w[i] * sorted[i];
    } else {
      stat = weighted_quantile(sorted, w, config.quantile);
    }
    summary.statistic_samples.push_back(std::clamp(stat, 0.0, 1.0));
  }

  const auto& stats = summary.statistic_samples;
  const auto [lo, hi] = std::minmax_element(stats.begin(), stats.end());
  // Clamps below only remove summation rounding: min <= mean <= CVaR <= max.
  summary.mean = std::clamp(std::accumulate(stats.begin(), stats.end(), 0.0) / double(stats.size()), *lo, *hi);
  const auto tail = cvar(stats, config.alpha);
  summary.var_alpha = tail.var_alpha;
  summary.cvar_alpha = std::max(tail.cvar_alpha, summary.mean);
  return summary;
}

PosteriorSummary bootstrap_posterior(std::span<const double> samples, const BootstrapConfig& config) {
  Rng rng(config.seed);
  return bootstrap_posterior(samples, config, rng);
}

std::map<std::string, PosteriorSummary> posterior_for_all_classes(const SampleSet& set,
                                                                  const BootstrapConfig& config) {
  if (set.per_class.empty()) throw ConfigError("sample set has no classes");
  std::map<std::string, PosteriorSummary> out;
  for (std::size_t i = 0; i < set.per_class.size(); ++i) {
    const auto& [name, readings] = set.per_class[i];
    Rng rng(substream_seed(config.seed, i));
    auto summary = bootstrap_posterior(readings, config, rng);
    summary.class_name = name;
    out.emplace(name, std::move(summary));
  }
  return out;
}

nlohmann::ordered_json posterior_to_json(const std::map<std::string, PosteriorSummary>& posteriors,
                                         const std::vector<std::string>& order) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& name : order) {
    auto it = posteriors.find(name);
    if (it == posteriors.end()) throw ConfigError("no posterior for class '" + name + "'");
    const auto& p = it->second;
    nlohmann::ordered_json j;
    j["mean"] = p.mean;
    j["var_alpha"] = p.var_alpha;
    j["cvar_alpha"] = p.cvar_alpha;
    j["R"] = p.config.resamples;
    j["alpha"] = p.config.alpha;
    j["seed"] = p.config.seed;
    out[name] = std::move(j);
  }
  return out;
}

std::map<std::string, PosteriorSummary> posterior_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("posterior document must be an object");
  std::map<std::string, PosteriorSummary> out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const auto& j = it.value();
    if (!j.is_object() || !j.contains("cvar_alpha") || !j["cvar_alpha"].is_number()) {
      throw ConfigError("posterior entry '" + it.key() + "' lacks a numeric cvar_alpha");
    }
    PosteriorSummary p;
    p.class_name = it.key();
    p.cvar_alpha = j["cvar_alpha"].get<double>();
    p.mean = j.value("mean", p.cvar_alpha);
    p.var_alpha = j.value("var_alpha", p.cvar_alpha);
    p.config.resamples = j.value("R", p.config.resamples);
    p.config.alpha = j.value("alpha", p.config.alpha);
    p.config.seed = j.value("seed", p.config.seed);
    out.emplace(it.key(), std::move(p));
  }
  return out;
}

}  // namespace semplan

#include "semplan/cost_field.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "semplan/errors.hpp"

namespace semplan {

void CostFieldConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ConfigError(fmt::format("gamma must be a finite value >= 0, got {}", gamma));
  }
}

CostField::CostField(int width, int height, std::vector<double> phi,
                     std::vector<std::string> class_names, std::vector<double> lambda_scaled,
                     CostFieldConfig config, std::shared_ptr<const DistanceFields> distances)
    : width_(width),
      height_(height),
      phi_(std::move(phi)),
      class_names_(std::move(class_names)),
      lambda_scaled_(std::move(lambda_scaled)),
      config_(config),
      distances_(std::move(distances)) {
  if (!distances_) distances_ = std::make_shared<const DistanceFields>();
}

double CostField::phi_at_point(double x, double y, PhiMode mode) const noexcept {
  const auto& fields = *distances_;
  if (mode == PhiMode::ExactSum) {
    double sum = 0.0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (lambda_scaled_[i] == 0.0) continue;
      sum += lambda_scaled_[i] * std::exp(-fields[i].sample(x, y));
    }
    return sum;
  }
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const double d = fields[i].sample(x, y);
    if (d < best) {
      best = d;
      best_i = i;
    }
  }
  return fields.empty() ? 0.0 : lambda_scaled_[best_i] * std::exp(-best);
}

double CostField::max_finite_phi() const noexcept {
  double m = 0.0;
  for (double v : phi_) {
    if (std::isfinite(v)) m = std::max(m, v);
  }
  return m;
}

double phi_kernel(double distance, double lambda) {
  if (!(distance >= 0.0)) throw ConfigError(fmt::format("distance must be >= 0, got {}", distance));
  if (!(lambda >= 0.0)) throw ConfigError(fmt::format("lambda must be >= 0, got {}", lambda));
  return lambda * std::exp(-distance);
}

std::vector<double> scale_lambdas(const std::vector<ObstacleClass>& classes,
                                  const std::map<std::string, double>& cvars) {
  std::vector<double> out;
  out.reserve(classes.size());
  for (const auto& cls : classes) {
    auto it = cvars.find(cls.name);
    if (it == cvars.end()) throw ConfigError("no posterior for class '" + cls.name + "'");
    if (!(it->second >= 0.0)) throw ConfigError("CVaR for '" + cls.name + "' must be >= 0");
    out.push_back(cls.lambda_prior * it->second);
  }
  return out;
}

std::vector<double> scale_lambdas(const std::vector<ObstacleClass>& classes,
                                  const std::map<std::string, PosteriorSummary>& posteriors) {
  std::map<std::string, double> cvars;
  for (const auto& [name, p] : posteriors) cvars.emplace(name, p.cvar_alpha);
  return scale_lambdas(classes, cvars);
}

CostField build_cost_field(const SemanticMap& map, std::shared_ptr<const DistanceFields> fields,
                           const std::vector<double>& lambdas, const CostFieldConfig& config) {
  config.validate();
  if (!fields || fields->size() != map.class_count()) {
    throw ConfigError("distance fields do not cover every class of the map");
  }
  if (lambdas.size() != map.class_count()) {
    throw ConfigError("one scaled lambda per class is required");
  }
  for (const auto& f : *fields) {
    if (f.width != map.width() || f.height != map.height() || f.values.size() != map.cell_count()) {
      throw ConfigError(fmt::format("distance field '{}' is {}x{}, map is {}x{}", f.class_name,
                                    f.width, f.height, map.width(), map.height()));
    }
  }
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw ConfigError("scaled lambdas must be >= 0");
  }

  std::vector<double> phi(map.cell_count(), 0.0);
  for (std::size_t c = 0; c < fields->size(); ++c) {
    const double lambda = lambdas[c];
    if (lambda == 0.0) continue;
    const auto& d = (*fields)[c].values;
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] += lambda * std::exp(-d[i]);
  }
  for (const auto& cls : map.classes()) {
    for (const Cell cell : cls.cells) phi[map.index(cell)] = std::numeric_limits<double>::infinity();
  }
  return CostField(map.width(), map.height(), std::move(phi), map.class_names(), lambdas, config,
                   std::move(fields));
}

CostField build_cost_field(const SemanticMap& map, DistanceFields fields,
                           const std::vector<double>& lambdas, const CostFieldConfig& config) {
  return build_cost_field(map, std::make_shared<const DistanceFields>(std::move(fields)), lambdas,
                          config);
}

double nearest_dominant_phi(const SemanticMap& map, const DistanceFields& fields,
                            const std::vector<double>& lambdas, Cell cell) {
  if (fields.size() != map.class_count() || lambdas.size() != map.class_count()) {
    throw ConfigError("fields and lambdas must cover every class of the map");
  }
  if (fields.empty()) return 0.0;
  const double delta = min_clearance_at(map, fields, cell);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].at(cell) == delta) return lambdas[i] * std::exp(-delta);
  }
  return 0.0;
}

nlohmann::ordered_json cost_field_to_json(const CostField& field) {
  nlohmann::ordered_json j;
  j["width"] = field.width();
  j["height"] = field.height();
  j["gamma"] = field.config().gamma;
  j["alpha"] = field.config().alpha;
  nlohmann::ordered_json lambdas = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < field.class_names().size(); ++i) {
    lambdas[field.class_names()[i]] = field.lambda_scaled()[i];
  }
  j["lambda_scaled"] = std::move(lambdas);
  // Row-major; obstacle cells are null.
  nlohmann::ordered_json phi = nlohmann::ordered_json::array();
  for (double v : field.phi_grid()) phi.push_back(std::isfinite(v) ? nlohmann::ordered_json(v) : nullptr);
  j["phi"] = std::move(phi);
  return j;
}

std::string cost_field_to_pgm(const CostField& field) {
  const double max_phi = field.max_finite_phi();
  std::string out = fmt::format("P5\n# phi_max {:.17g}\n{} {}\n255\n", max_phi, field.width(), field.height());
  out.reserve(out.size() + field.phi_grid().size());
  for (double v : field.phi_grid()) {
    unsigned char px = 255;
    if (std::isfinite(v)) {
      px = max_phi > 0.0 ? static_cast<unsigned char>(std::lround(255.0 * v / max_phi)) : 0;
    }
    out.push_back(static_cast<char>(px));
  }
  return out;
}

}  // namespace semplan

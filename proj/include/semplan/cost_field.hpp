#pragma once

// Prompt-conditioned repulsive potential over the grid.

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "semplan/risk_posterior.hpp"
#include "semplan/semantic_map.hpp"

namespace semplan {

struct CostFieldConfig {
  /// Semantic cost weight; applied by the planner, not baked into phi.
  double gamma = 1.5;
  /// CVaR level the lambdas were derived with (provenance only).
  double alpha = 0.1;

  void validate() const;
};

/// How the potential is evaluated at off-grid points.
enum class PhiMode {
  /// Sum over all classes.
  ExactSum,
  /// Only the class nearest to the point contributes.
  NearestDominant,
};

class CostField {
public:
  CostField(int width, int height, std::vector<double> phi, std::vector<std::string> class_names,
            std::vector<double> lambda_scaled, CostFieldConfig config,
            std::shared_ptr<const DistanceFields> distances);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool in_bounds(Cell c) const noexcept {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  std::size_t index(Cell c) const noexcept {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }

  /// Potential at a cell; +inf on obstacle cells.
  double phi(Cell c) const noexcept { return phi_[index(c)]; }
  const std::vector<double>& phi_grid() const noexcept { return phi_; }
  bool blocked(Cell c) const noexcept { return std::isinf(phi(c)); }

  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  const std::vector<double>& lambda_scaled() const noexcept { return lambda_scaled_; }
  const CostFieldConfig& config() const noexcept { return config_; }
  const DistanceFields& distances() const noexcept { return *distances_; }

  /// Potential at a continuous point using bilinearly interpolated distances.
  double phi_at_point(double x, double y, PhiMode mode) const noexcept;

  /// Largest finite phi (0 when every free cell is 0).
  double max_finite_phi() const noexcept;

private:
  int width_;
  int height_;
  std::vector<double> phi_;
  std::vector<std::string> class_names_;
  std::vector<double> lambda_scaled_;
  CostFieldConfig config_;
  std::shared_ptr<const DistanceFields> distances_;
};

/// lambda * exp(-distance). Throws ConfigError on negative inputs.
double phi_kernel(double distance, double lambda);

/// lambda_prior(c) * CVaR(c) for each class, in class order.
std::vector<double> scale_lambdas(const std::vector<ObstacleClass>& classes,
                                  const std::map<std::string, PosteriorSummary>& posteriors);
std::vector<double> scale_lambdas(const std::vector<ObstacleClass>& classes,
                                  const std::map<std::string, double>& cvars);

/// Sum over classes of lambda_c * exp(-d_c) on free cells; +inf on obstacle cells.
CostField build_cost_field(const SemanticMap& map, DistanceFields fields,
                           const std::vector<double>& lambdas, const CostFieldConfig& config);
CostField build_cost_field(const SemanticMap& map, std::shared_ptr<const DistanceFields> fields,
                           const std::vector<double>& lambdas, const CostFieldConfig& config);

/// lambda of the nearest class times exp(-clearance). Ties go to the lower class index.
double nearest_dominant_phi(const SemanticMap& map, const DistanceFields& fields,
                            const std::vector<double>& lambdas, Cell cell);

nlohmann::ordered_json cost_field_to_json(const CostField& field);
/// Binary PGM (P5), max-normalized over free cells; obstacle cells are white.
std::string cost_field_to_pgm(const CostField& field);

}  // namespace semplan

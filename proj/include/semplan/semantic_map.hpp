#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace semplan {

/// Grid cell in (col, row) convention, origin top-left.
struct Cell {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(const Cell&, const Cell&) = default;
  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

struct ObstacleClass {
  std::string name;
  std::vector<Cell> cells;  // sorted, unique
  double lambda_prior = 1.0;
};

/// Labeled planning environment. Immutable once constructed.
class SemanticMap {
public:
  static constexpr int kFree = -1;

  /// Validates every invariant and throws MapError on violation.
  SemanticMap(int width, int height, std::vector<ObstacleClass> classes, Cell start, Cell goal);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t cell_count() const noexcept { return labels_.size(); }
  const std::vector<ObstacleClass>& classes() const noexcept { return classes_; }
  std::size_t class_count() const noexcept { return classes_.size(); }
  Cell start() const noexcept { return start_; }
  Cell goal() const noexcept { return goal_; }

  bool in_bounds(Cell c) const noexcept {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  std::size_t index(Cell c) const noexcept {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }
  Cell cell_at(std::size_t index) const noexcept {
    return {static_cast<int>(index % static_cast<std::size_t>(width_)),
            static_cast<int>(index / static_cast<std::size_t>(width_))};
  }

  /// Class index owning the cell, or kFree.
  int label(Cell c) const noexcept { return labels_[index(c)]; }
  bool is_obstacle(Cell c) const noexcept { return label(c) != kFree; }

  std::optional<std::size_t> find_class(std::string_view name) const noexcept;
  /// Throws MapError(UnknownClass).
  std::size_t class_index(std::string_view name) const;
  std::vector<std::string> class_names() const;

  /// Same geometry with different start/goal (validated).
  SemanticMap with_endpoints(Cell start, Cell goal) const;

private:
  int width_;
  int height_;
  std::vector<ObstacleClass> classes_;
  Cell start_;
  Cell goal_;
  std::vector<int> labels_;
};

/// Parses the JSON map document. Rectangles are inclusive and expanded to cells.
SemanticMap load_map(const nlohmann::json& doc);
SemanticMap load_map_string(std::string_view text);
SemanticMap load_map_file(const std::filesystem::path& path);

nlohmann::json map_to_json(const SemanticMap& map);

/// Euclidean distance (cell units) from every cell center to the nearest cell of one class.
struct DistanceField {
  std::string class_name;
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major

  double at(Cell c) const noexcept {
    return values[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(c.x)];
  }
  /// Bilinear interpolation at a continuous point (cell centers at integer
  /// coordinates); points outside the grid are clamped to the border.
  double sample(double x, double y) const noexcept;
};

/// One field per class, in the map's class order.
using DistanceFields = std::vector<DistanceField>;

/// Exact Euclidean distance transform of one class (separable lower-envelope method).
DistanceField distance_field(const SemanticMap& map, std::string_view class_name);
DistanceFields all_distance_fields(const SemanticMap& map);

/// Squared EDT of a binary grid; `seeds[i] != 0` marks source cells.
/// Cells are left at +inf when the grid has no seed.
std::vector<double> squared_edt(int width, int height, const std::vector<std::uint8_t>& seeds);

/// min over classes of d_i(cell).
double min_clearance_at(const SemanticMap& map, const DistanceFields& fields, Cell cell);

}  // namespace semplan

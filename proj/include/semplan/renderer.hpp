#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semplan/cost_field.hpp"
#include "semplan/semantic_map.hpp"

namespace semplan {

struct PathOverlay {
  std::string label;
  std::vector<Cell> path;
  std::string color;  // any SVG color, e.g. "#e6194b"
};

struct RenderSpec {
  const SemanticMap& map;
  const CostField& field;
  std::vector<PathOverlay> paths;
  int cell_pixels = 8;
  /// Embedded verbatim (XML-escaped) in the SVG <metadata> element.
  std::string metadata;
};

/// Per-cell gray level: round(255 * phi / max phi) on free cells, 255 on obstacles.
std::vector<std::uint8_t> field_intensity(const CostField& field);

/// SVG 1.1 document: field heatmap, solid obstacles, one polyline per path and
/// a legend. Byte-identical for identical specs.
std::string render_overlay_svg(const RenderSpec& spec);

/// Grayscale field dump (P5), scaled by cell_pixels.
std::string render_field_pgm(const RenderSpec& spec);

}  // namespace semplan

#include "semplan/renderer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "semplan/errors.hpp"

namespace semplan {

namespace {

void validate(const RenderSpec& spec) {
  if (spec.map.width() <= 0 || spec.map.height() <= 0) throw ConfigError("cannot render a zero-size map");
  if (spec.cell_pixels < 1) throw ConfigError("cell_pixels must be >= 1");
  if (spec.field.width() != spec.map.width() || spec.field.height() != spec.map.height()) {
    throw ConfigError("cost field and map differ in size");
  }
  for (const auto& p : spec.paths) {
    for (const Cell c : p.path) {
      if (!spec.map.in_bounds(c)) {
        throw ConfigError(fmt::format("path '{}' leaves the map at ({},{})", p.label, c.x, c.y));
      }
    }
  }
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

constexpr const char* kObstacleFill = "#3b4cc0";
constexpr int kLegendRow = 16;

}  // namespace

std::vector<std::uint8_t> field_intensity(const CostField& field) {
  const double max_phi = field.max_finite_phi();
  std::vector<std::uint8_t> out;
  out.reserve(field.phi_grid().size());
  for (double v : field.phi_grid()) {
    if (!std::isfinite(v)) {
      out.push_back(255);
    } else {
      out.push_back(max_phi > 0.0 ? static_cast<std::uint8_t>(std::lround(255.0 * v / max_phi)) : 0);
    }
  }
  return out;
}

std::string render_overlay_svg(const RenderSpec& spec) {
  validate(spec);
  const int px = spec.cell_pixels;
  const int w = spec.map.width();
  const int h = spec.map.height();
  const int img_w = w * px;
  const int img_h = h * px + kLegendRow * static_cast<int>(spec.paths.size() + 1);
  const auto intensity = field_intensity(spec.field);

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n",
      img_w, img_h);
  svg += fmt::format("<!-- phi_max={:.17g} (intensity = phi / phi_max) -->\n", spec.field.max_finite_phi());
  if (!spec.metadata.empty()) svg += "<metadata>" + xml_escape(spec.metadata) + "</metadata>\n";
  svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", img_w, img_h);

  // Field: horizontal runs of equal intensity over free cells.
  svg += "<g id=\"field\" shape-rendering=\"crispEdges\">\n";
  for (int y = 0; y < h; ++y) {
    int x = 0;
    while (x < w) {
      if (spec.map.is_obstacle({x, y})) {
        ++x;
        continue;
      }
      const auto v = intensity[spec.map.index({x, y})];
      int end = x + 1;
      while (end < w && !spec.map.is_obstacle({end, y}) && intensity[spec.map.index({end, y})] == v) ++end;
      svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"rgb({},{},{})\"/>\n",
                         x * px, y * px, (end - x) * px, px, v, v, v);
      x = end;
    }
  }
  svg += "</g>\n";

  svg += "<g id=\"obstacles\" shape-rendering=\"crispEdges\">\n";
  for (const auto& cls : spec.map.classes()) {
    svg += fmt::format("<g class=\"{}\">\n", xml_escape(cls.name));
    // Cells are sorted (x, y); emit one rect per vertical run.
    std::size_t i = 0;
    double cx = 0.0, cy = 0.0;
    while (i < cls.cells.size()) {
      const Cell first = cls.cells[i];
      std::size_t j = i + 1;
      while (j < cls.cells.size() && cls.cells[j].x == first.x && cls.cells[j].y == cls.cells[j - 1].y + 1) ++j;
      svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", first.x * px,
                         first.y * px, px, static_cast<int>(j - i) * px, kObstacleFill);
      i = j;
    }
    for (const Cell c : cls.cells) {
      cx += c.x;
      cy += c.y;
    }
    cx = (cx / double(cls.cells.size()) + 0.5) * px;
    cy = (cy / double(cls.cells.size()) + 0.5) * px;
    svg += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"{}\" fill=\"#ffffff\" "
        "text-anchor=\"middle\">{}</text>\n",
        cx, cy, std::max(8, px + 2), xml_escape(cls.name));
    svg += "</g>\n";
  }
  svg += "</g>\n";

  svg += "<g id=\"paths\" fill=\"none\" stroke-linejoin=\"round\">\n";
  for (const auto& p : spec.paths) {
    std::string points;
    for (const Cell c : p.path) {
      if (!points.empty()) points += ' ';
      points += fmt::format("{:g},{:g}", (c.x + 0.5) * px, (c.y + 0.5) * px);
    }
    svg += fmt::format("<polyline points=\"{}\" stroke=\"{}\" stroke-width=\"{:g}\"><title>{}</title></polyline>\n",
                       points, xml_escape(p.color), std::max(1.0, px / 3.0), xml_escape(p.label));
  }
  svg += "</g>\n";

  svg += "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  int ly = h * px + kLegendRow;
  for (const auto& p : spec.paths) {
    svg += fmt::format("<line x1=\"4\" y1=\"{0}\" x2=\"24\" y2=\"{0}\" stroke=\"{1}\" stroke-width=\"3\"/>\n",
                       ly - 4, xml_escape(p.color));
    svg += fmt::format("<text x=\"30\" y=\"{}\" fill=\"#000000\">{}</text>\n", ly, xml_escape(p.label));
    ly += kLegendRow;
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

std::string render_field_pgm(const RenderSpec& spec) {
  validate(spec);
  const int px = spec.cell_pixels;
  const int w = spec.map.width() * px;
  const int h = spec.map.height() * px;
  const auto intensity = field_intensity(spec.field);
  std::string out = fmt::format("P5\n# phi_max {:.17g}\n{} {}\n255\n", spec.field.max_finite_phi(), w, h);
  const std::size_t header = out.size();
  out.resize(header + static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out[header + static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] =
          static_cast<char>(intensity[spec.map.index({x / px, y / px})]);
    }
  }
  return out;
}

}  // namespace semplan

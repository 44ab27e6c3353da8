#include "semplan/semantic_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "semplan/errors.hpp"

namespace semplan {

namespace {

std::string cell_str(Cell c) { return fmt::format("({},{})", c.x, c.y); }

}  // namespace

SemanticMap::SemanticMap(int width, int height, std::vector<ObstacleClass> classes, Cell start,
                         Cell goal)
    : width_(width), height_(height), classes_(std::move(classes)), start_(start), goal_(goal) {
  if (width_ <= 0 || height_ <= 0) {
    throw MapError(MapErrorKind::Malformed,
                   fmt::format("map dimensions must be positive, got {}x{}", width_, height_));
  }
  labels_.assign(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_), kFree);

  std::set<std::string, std::less<>> names;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    auto& cls = classes_[i];
    if (cls.name.empty()) {
      throw MapError(MapErrorKind::Malformed, "obstacle class name must be non-empty");
    }
    if (!names.insert(cls.name).second) {
      throw MapError(MapErrorKind::DuplicateClass, "duplicate class name '" + cls.name + "'");
    }
    if (!(cls.lambda_prior >= 0.0) || !std::isfinite(cls.lambda_prior)) {
      throw MapError(MapErrorKind::Malformed,
                     "class '" + cls.name + "' has a negative or non-finite lambda_prior");
    }
    std::sort(cls.cells.begin(), cls.cells.end());
    cls.cells.erase(std::unique(cls.cells.begin(), cls.cells.end()), cls.cells.end());
    if (cls.cells.empty()) {
      throw MapError(MapErrorKind::Malformed, "class '" + cls.name + "' has no cells");
    }
    for (const Cell c : cls.cells) {
      if (!in_bounds(c)) {
        throw MapError(MapErrorKind::OutOfBounds,
                       "class '" + cls.name + "' cell " + cell_str(c) + " is out of bounds");
      }
      int& slot = labels_[index(c)];
      if (slot != kFree) {
        throw MapError(MapErrorKind::OverlappingClasses,
                       "cell " + cell_str(c) + " belongs to both '" +
                           classes_[static_cast<std::size_t>(slot)].name + "' and '" + cls.name +
                           "'");
      }
      slot = static_cast<int>(i);
    }
  }

  if (!in_bounds(start_)) {
    throw MapError(MapErrorKind::OutOfBounds, "start " + cell_str(start_) + " is out of bounds");
  }
  if (!in_bounds(goal_)) {
    throw MapError(MapErrorKind::OutOfBounds, "goal " + cell_str(goal_) + " is out of bounds");
  }
  if (is_obstacle(start_)) {
    throw MapError(MapErrorKind::StartInObstacle,
                   "start " + cell_str(start_) + " lies inside '" +
                       classes_[static_cast<std::size_t>(label(start_))].name + "'");
  }
  if (is_obstacle(goal_)) {
    throw MapError(MapErrorKind::GoalInObstacle,
                   "goal " + cell_str(goal_) + " lies inside '" +
                       classes_[static_cast<std::size_t>(label(goal_))].name + "'");
  }
}

std::optional<std::size_t> SemanticMap::find_class(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (classes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t SemanticMap::class_index(std::string_view name) const {
  if (auto i = find_class(name)) return *i;
  throw MapError(MapErrorKind::UnknownClass, "unknown class '" + std::string(name) + "'");
}

std::vector<std::string> SemanticMap::class_names() const {
  std::vector<std::string> out;
  out.reserve(classes_.size());
  for (const auto& c : classes_) out.push_back(c.name);
  return out;
}

SemanticMap SemanticMap::with_endpoints(Cell start, Cell goal) const {
  return SemanticMap(width_, height_, classes_, start, goal);
}

// ---------------------------------------------------------------------------
// JSON document

namespace {

int get_int(const nlohmann::json& j, const char* what) {
  if (!j.is_number_integer()) {
    throw MapError(MapErrorKind::Malformed, std::string("expected integer for ") + what);
  }
  return j.get<int>();
}

Cell get_cell(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) {
    throw MapError(MapErrorKind::Malformed, std::string(what) + " must be an [x, y] pair");
  }
  return {get_int(j[0], what), get_int(j[1], what)};
}

}  // namespace

SemanticMap load_map(const nlohmann::json& doc) {
  if (!doc.is_object()) throw MapError(MapErrorKind::Malformed, "map document must be an object");
  for (const char* key : {"width", "height", "start", "goal"}) {
    if (!doc.contains(key)) {
      throw MapError(MapErrorKind::Malformed, std::string("map document is missing '") + key + "'");
    }
  }
  const int width = get_int(doc["width"], "width");
  const int height = get_int(doc["height"], "height");
  const Cell start = get_cell(doc["start"], "start");
  const Cell goal = get_cell(doc["goal"], "goal");

  std::vector<ObstacleClass> classes;
  if (doc.contains("classes")) {
    const auto& jclasses = doc["classes"];
    if (!jclasses.is_array()) throw MapError(MapErrorKind::Malformed, "'classes' must be an array");
    for (const auto& jc : jclasses) {
      if (!jc.is_object() || !jc.contains("name") || !jc["name"].is_string()) {
        throw MapError(MapErrorKind::Malformed, "each class needs a string 'name'");
      }
      ObstacleClass cls;
      cls.name = jc["name"].get<std::string>();
      if (jc.contains("lambda_prior")) {
        if (!jc["lambda_prior"].is_number()) {
          throw MapError(MapErrorKind::Malformed, "lambda_prior must be a number");
        }
        cls.lambda_prior = jc["lambda_prior"].get<double>();
      }
      if (jc.contains("cells")) {
        if (!jc["cells"].is_array()) throw MapError(MapErrorKind::Malformed, "'cells' must be an array");
        for (const auto& jcell : jc["cells"]) cls.cells.push_back(get_cell(jcell, "cell"));
      }
      if (jc.contains("rects")) {
        if (!jc["rects"].is_array()) throw MapError(MapErrorKind::Malformed, "'rects' must be an array");
        for (const auto& r : jc["rects"]) {
          if (!r.is_array() || r.size() != 4) {
            throw MapError(MapErrorKind::Malformed, "rect must be [x0, y0, x1, y1]");
          }
          int x0 = get_int(r[0], "rect"), y0 = get_int(r[1], "rect");
          int x1 = get_int(r[2], "rect"), y1 = get_int(r[3], "rect");
          if (x0 > x1) std::swap(x0, x1);
          if (y0 > y1) std::swap(y0, y1);
          if (x0 < 0 || y0 < 0 || x1 >= width || y1 >= height) {
            throw MapError(MapErrorKind::OutOfBounds,
                           fmt::format("class '{}' rect [{},{},{},{}] exceeds the {}x{} map",
                                       cls.name, x0, y0, x1, y1, width, height));
          }
          for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) cls.cells.push_back({x, y});
        }
      }
      classes.push_back(std::move(cls));
    }
  }
  return SemanticMap(width, height, std::move(classes), start, goal);
}

SemanticMap load_map_string(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MapError(MapErrorKind::Malformed, std::string("map document is not valid JSON: ") + e.what());
  }
  return load_map(doc);
}

SemanticMap load_map_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MapError(MapErrorKind::Io, "cannot open map file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_map_string(ss.str());
}

nlohmann::json map_to_json(const SemanticMap& map) {
  nlohmann::json doc;
  doc["width"] = map.width();
  doc["height"] = map.height();
  doc["start"] = {map.start().x, map.start().y};
  doc["goal"] = {map.goal().x, map.goal().y};
  doc["classes"] = nlohmann::json::array();
  for (const auto& cls : map.classes()) {
    nlohmann::json jc;
    jc["name"] = cls.name;
    jc["lambda_prior"] = cls.lambda_prior;
    jc["cells"] = nlohmann::json::array();
    for (const Cell c : cls.cells) jc["cells"].push_back({c.x, c.y});
    doc["classes"].push_back(std::move(jc));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Distance transform

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared distance transform of a sampled function (lower envelope of
// parabolas rooted at each sample). `f` has +inf at non-seed positions.
void edt_1d(const double* f, double* out, int n, std::vector<int>& v, std::vector<double>& z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = 0.0;
    for (;;) {
      const int p = v[static_cast<std::size_t>(k)];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) out[q] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(j) + 1] < q) ++j;
    const int p = v[static_cast<std::size_t>(j)];
    out[q] = double(q - p) * double(q - p) + f[p];
  }
}

}  // namespace

std::vector<double> squared_edt(int width, int height, const std::vector<std::uint8_t>& seeds) {
  const auto w = static_cast<std::size_t>(width);
  const auto h = static_cast<std::size_t>(height);
  std::vector<double> grid(w * h);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = seeds[i] ? 0.0 : kInf;

  const std::size_t n = std::max(w, h);
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  std::vector<double> in(n), out(n);

  // Columns first, then rows.
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) in[y] = grid[y * w + x];
    edt_1d(in.data(), out.data(), height, v, z);
    for (std::size_t y = 0; y < h; ++y) grid[y * w + x] = out[y];
  }
  for (std::size_t y = 0; y < h; ++y) {
    edt_1d(&grid[y * w], out.data(), width, v, z);
    std::copy(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(w), grid.begin() + static_cast<std::ptrdiff_t>(y * w));
  }
  return grid;
}

DistanceField distance_field(const SemanticMap& map, std::string_view class_name) {
  const std::size_t ci = map.class_index(class_name);
  std::vector<std::uint8_t> seeds(map.cell_count(), 0);
  for (const Cell c : map.classes()[ci].cells) seeds[map.index(c)] = 1;

  DistanceField field;
  field.class_name = std::string(class_name);
  field.width = map.width();
  field.height = map.height();
  field.values = squared_edt(map.width(), map.height(), seeds);
  for (double& d : field.values) d = std::sqrt(d);
  return field;
}

DistanceFields all_distance_fields(const SemanticMap& map) {
  DistanceFields fields;
  fields.reserve(map.class_count());
  for (const auto& cls : map.classes()) fields.push_back(distance_field(map, cls.name));
  return fields;
}

double DistanceField::sample(double x, double y) const noexcept {
  x = std::clamp(x, 0.0, double(width - 1));
  y = std::clamp(y, 0.0, double(height - 1));
  const int x0 = std::min(static_cast<int>(x), width - 1);
  const int y0 = std::min(static_cast<int>(y), height - 1);
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double v00 = at({x0, y0}), v10 = at({x1, y0});
  const double v01 = at({x0, y1}), v11 = at({x1, y1});
  const double top = v00 + (v10 - v00) * fx;
  const double bottom = v01 + (v11 - v01) * fx;
  return top + (bottom - top) * fy;
}

double min_clearance_at(const SemanticMap& map, const DistanceFields& fields, Cell cell) {
  if (!map.in_bounds(cell)) {
    throw MapError(MapErrorKind::OutOfBounds, "clearance query " + cell_str(cell) + " is out of bounds");
  }
  if (fields.size() != map.class_count()) {
    throw ConfigError("distance fields do not cover every class of the map");
  }
  double best = kInf;
  for (const auto& f : fields) best = std::min(best, f.at(cell));
  return best;
}

}  // namespace semplan

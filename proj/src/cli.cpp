#include "semplan/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "semplan/errors.hpp"
#include "semplan/eval_metrics.hpp"
#include "semplan/renderer.hpp"
#include "semplan/semantic_map.hpp"

namespace semplan::cli {

namespace {

std::string mode_name(SensorMode m) {
  switch (m) {
    case SensorMode::Live: return "live";
    case SensorMode::Mock: return "mock";
    case SensorMode::Cache: return "cache";
  }
  return "?";
}

std::string baseline_name(Baseline b) {
  switch (b) {
    case Baseline::None: return "none";
    case Baseline::AStar: return "astar";
    case Baseline::FixedCost: return "fixed";
  }
  return "?";
}

Baseline parse_baseline(const std::string& s) {
  if (s == "none" || s.empty()) return Baseline::None;
  if (s == "astar") return Baseline::AStar;
  if (s == "fixed") return Baseline::FixedCost;
  throw ConfigError("unknown baseline '" + s + "' (expected none, astar or fixed)");
}

std::pair<double, double> beta_pair(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(what + " must be an [a, b] pair of numbers");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class T>
void read_if(const nlohmann::json& obj, const char* key, T& target) {
  if (!obj.contains(key) || obj[key].is_null()) return;
  try {
    target = obj[key].get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type: " + e.what());
  }
}

std::vector<int> parse_ks(const std::string& text) {
  std::vector<int> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      ks.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--ks expects a comma-separated list of integers, got '" + text + "'");
    }
  }
  if (ks.empty()) throw ConfigError("--ks must list at least one shot count");
  return ks;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
  if (!out) throw ConfigError("failed writing " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["map"] = map_path.generic_string();
  j["prompt"] = prompt_text;
  j["mode"] = mode_name(mode);
  if (mode == SensorMode::Cache) j["cache"] = cache_path.generic_string();
  if (!posterior_path.empty()) j["posterior"] = posterior_path.generic_string();
  j["sensor"] = {
      {"endpoint", sensor.endpoint},
      {"model", sensor.model_name},
      {"k", sensor.k},
      {"temperature", sensor.temperature},
      {"max_retries", sensor.max_retries},
      {"timeout_s", sensor.timeout_s},
      {"api_key_env", sensor.api_key_env},
      {"shot_mode", sensor.shot_mode == ShotMode::Batched ? "batched" : "independent"},
  };
  if (mode == SensorMode::Mock) {
    nlohmann::ordered_json classes = nlohmann::ordered_json::object();
    for (const auto& [name, ab] : mock.per_class) classes[name] = {ab.first, ab.second};
    j["mock"] = {{"default", {mock.default_params.first, mock.default_params.second}},
                 {"classes", std::move(classes)},
                 {"delay_ms", mock.delay_ms}};
  }
  j["bootstrap"] = {{"R", bootstrap.resamples}, {"alpha", bootstrap.alpha}, {"seed", bootstrap.seed}};
  j["planner"] = {
      {"gamma", planner.gamma},
      {"connectivity", static_cast<int>(planner.connectivity)},
      {"w1", planner.w1},
      {"w2", planner.w2},
      {"delta_ell", planner.delta_ell},
      {"aux_phi_mode", planner.aux_phi_mode == PhiMode::ExactSum ? "exact_sum" : "nearest_dominant"},
  };
  j["threshold"] = threshold ? nlohmann::ordered_json(*threshold) : nullptr;
  j["baseline"] = baseline_name(baseline);
  j["fixed_weight"] = fixed_weight;
  return j;
}

void apply_config_json(RunConfig& c, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
  std::string s;
  if (doc.contains("map")) { read_if(doc, "map", s); c.map_path = s; }
  read_if(doc, "prompt", c.prompt_text);
  if (doc.contains("out")) { read_if(doc, "out", s); c.out_dir = s; }
  if (doc.contains("cache")) {
    read_if(doc, "cache", s);
    c.cache_path = s;
    c.mode = SensorMode::Cache;
  }
  if (doc.contains("posterior")) { read_if(doc, "posterior", s); c.posterior_path = s; }
  if (doc.contains("mode")) {
    read_if(doc, "mode", s);
    if (s == "live") c.mode = SensorMode::Live;
    else if (s == "mock") c.mode = SensorMode::Mock;
    else if (s == "cache") c.mode = SensorMode::Cache;
    else throw ConfigError("unknown sensor mode '" + s + "'");
  }
  if (doc.contains("sensor")) {
    const auto& j = doc["sensor"];
    read_if(j, "endpoint", c.sensor.endpoint);
    read_if(j, "model", c.sensor.model_name);
    read_if(j, "k", c.sensor.k);
    read_if(j, "temperature", c.sensor.temperature);
    read_if(j, "max_retries", c.sensor.max_retries);
    read_if(j, "timeout_s", c.sensor.timeout_s);
    read_if(j, "api_key_env", c.sensor.api_key_env);
    if (j.contains("shot_mode")) {
      read_if(j, "shot_mode", s);
      if (s == "independent") c.sensor.shot_mode = ShotMode::Independent;
      else if (s == "batched") c.sensor.shot_mode = ShotMode::Batched;
      else throw ConfigError("unknown shot_mode '" + s + "'");
    }
  }
  if (doc.contains("mock")) {
    const auto& j = doc["mock"];
    bool enabled = true;
    read_if(j, "enabled", enabled);
    if (enabled) c.mode = SensorMode::Mock;
    if (j.contains("default")) c.mock.default_params = beta_pair(j["default"], "mock.default");
    if (j.contains("classes")) {
      if (!j["classes"].is_object()) throw ConfigError("mock.classes must be an object");
      for (auto it = j["classes"].begin(); it != j["classes"].end(); ++it) {
        c.mock.per_class[it.key()] = beta_pair(it.value(), "mock.classes." + it.key());
      }
    }
    read_if(j, "delay_ms", c.mock.delay_ms);
  }
  if (doc.contains("bootstrap")) {
    const auto& j = doc["bootstrap"];
    read_if(j, "R", c.bootstrap.resamples);
    read_if(j, "alpha", c.bootstrap.alpha);
    read_if(j, "seed", c.bootstrap.seed);
  }
  if (doc.contains("planner")) {
    const auto& j = doc["planner"];
    read_if(j, "gamma", c.planner.gamma);
    int conn = static_cast<int>(c.planner.connectivity);
    read_if(j, "connectivity", conn);
    if (conn != 4 && conn != 8) throw ConfigError("planner.connectivity must be 4 or 8");
    c.planner.connectivity = conn == 4 ? Connectivity::Four : Connectivity::Eight;
    read_if(j, "w1", c.planner.w1);
    read_if(j, "w2", c.planner.w2);
    read_if(j, "delta_ell", c.planner.delta_ell);
    if (j.contains("aux_phi_mode")) {
      read_if(j, "aux_phi_mode", s);
      if (s == "exact_sum") c.planner.aux_phi_mode = PhiMode::ExactSum;
      else if (s == "nearest_dominant") c.planner.aux_phi_mode = PhiMode::NearestDominant;
      else throw ConfigError("unknown aux_phi_mode '" + s + "'");
    }
  }
  if (doc.contains("threshold") && !doc["threshold"].is_null()) {
    double t = 0.0;
    read_if(doc, "threshold", t);
    c.threshold = t;
  }
  if (doc.contains("baseline")) { read_if(doc, "baseline", s); c.baseline = parse_baseline(s); }
  read_if(doc, "fixed_weight", c.fixed_weight);
  if (doc.contains("ablate")) {
    const auto& j = doc["ablate"];
    read_if(j, "ks", c.ks);
    read_if(j, "runs", c.runs);
  }
  read_if(doc, "cell_pixels", c.cell_pixels);
}

// ---------------------------------------------------------------------------
// Pipeline pieces

namespace {

struct Context {
  RunConfig config;
  std::ostream& out;
  std::ostream& err;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

Prompt make_prompt(const RunConfig& c, const SemanticMap& map) {
  require(!c.prompt_text.empty(), "--prompt is required");
  return Prompt(c.prompt_text, map.class_names());
}

SampleSet acquire_samples(const RunConfig& c, const Prompt& prompt) {
  switch (c.mode) {
    case SensorMode::Mock:
      return sample_mock(c.bootstrap.seed, prompt, c.sensor.k, c.mock.per_class, c.mock.default_params);
    case SensorMode::Cache:
      return cache_load(c.cache_path, prompt);
    case SensorMode::Live:
      break;
  }
  return sample_llm(c.sensor, prompt);
}

std::map<std::string, PosteriorSummary> acquire_posteriors(const RunConfig& c, const SemanticMap& map) {
  if (!c.posterior_path.empty()) {
    // Accepts the file written by `posterior` as well as a bare class -> summary object.
    const auto doc = read_json_file(c.posterior_path);
    return posterior_from_json(doc.contains("posterior") ? doc["posterior"] : doc);
  }
  const Prompt prompt = make_prompt(c, map);
  return posterior_for_all_classes(acquire_samples(c, prompt), c.bootstrap);
}

std::string cvar_table(const RunConfig& c, const SemanticMap& map,
                       const std::map<std::string, PosteriorSummary>& posteriors) {
  std::string head = fmt::format("{:<16}", "");
  std::string row = fmt::format("{:<16}", "Posterior CVaR");
  for (const auto& name : map.class_names()) {
    const auto width = std::max<std::size_t>(name.size(), 6) + 2;
    head += fmt::format("{:>{}}", name, width);
    auto it = posteriors.find(name);
    row += it == posteriors.end() ? fmt::format("{:>{}}", "-", width)
                                  : fmt::format("{:>{}.3f}", it->second.cvar_alpha, width);
  }
  return fmt::format("Hyperparameters (k={}, R={}, alpha={}, tau={}, gamma={})\n{}\n{}\n", c.sensor.k,
                     c.bootstrap.resamples, c.bootstrap.alpha, c.sensor.temperature, c.planner.gamma, head,
                     row);
}

std::filesystem::path out_path(const RunConfig& c, const char* name) {
  std::filesystem::create_directories(c.out_dir);
  return c.out_dir / name;
}

nlohmann::ordered_json with_config(nlohmann::ordered_json body, const RunConfig& c) {
  body["config"] = c.to_json();
  return body;
}

int cmd_sample(Context& ctx) {
  const auto& c = ctx.config;
  require(!c.map_path.empty(), "--map is required");
  const SemanticMap map = load_map_file(c.map_path);
  const Prompt prompt = make_prompt(c, map);
  const SampleSet set = acquire_samples(c, prompt);
  const auto path = out_path(c, "samples.json");
  cache_store(set, path, c.to_json());
  for (const auto& [name, values] : set.per_class) {
    ctx.out << name << ':';
    for (double v : values) ctx.out << fmt::format(" {:.3f}", v);
    ctx.out << '\n';
  }
  ctx.out << "wrote " << path.generic_string() << '\n';
  return kOk;
}

int cmd_posterior(Context& ctx) {
  const auto& c = ctx.config;
  require(!c.map_path.empty(), "--map is required");
  const SemanticMap map = load_map_file(c.map_path);
  const auto posteriors = acquire_posteriors(c, map);
  const auto path = out_path(c, "posterior.json");
  nlohmann::ordered_json doc;
  doc["posterior"] = posterior_to_json(posteriors, map.class_names());
  write_file(path, with_config(std::move(doc), c).dump(2) + "\n");
  ctx.out << cvar_table(c, map, posteriors) << "wrote " << path.generic_string() << '\n';
  return kOk;
}

const char* method_color(Method m) {
  switch (m) {
    case Method::AStarBaseline: return "#e6194b";
    case Method::Ours: return "#3cb44b";
    case Method::FixedCost: return "#f58231";
  }
  return "#000000";
}

int cmd_plan(Context& ctx) {
  const auto& c = ctx.config;
  require(!c.map_path.empty(), "--map is required");
  const SemanticMap map = load_map_file(c.map_path);
  const auto posteriors = acquire_posteriors(c, map);
  const auto fields = std::make_shared<const DistanceFields>(all_distance_fields(map));

  CostFieldConfig field_config = c.field;
  field_config.gamma = c.planner.gamma;
  field_config.alpha = c.bootstrap.alpha;
  const auto cvars = cvars_of(posteriors);
  const CostField field = build_cost_field(map, fields, scale_lambdas(map.classes(), cvars), field_config);

  PlanResult plan;
  switch (c.baseline) {
    case Baseline::None:
      plan = mhastar(map, field, c.planner);
      break;
    case Baseline::AStar: {
      PlannerConfig p = c.planner;
      p.gamma = 0.0;
      plan = astar(map, field, p);
      break;
    }
    case Baseline::FixedCost: {
      std::map<std::string, double> fixed;
      for (const auto& cls : map.classes()) fixed[cls.name] = c.fixed_weight;
      const CostField fixed_field = build_cost_field(map, fields, scale_lambdas(map.classes(), fixed), field_config);
      plan = mhastar(map, fixed_field, c.planner);
      break;
    }
  }

  ctx.out << cvar_table(c, map, posteriors);
  write_file(out_path(c, "plan.json"), with_config(plan_to_json(plan), c).dump(2) + "\n");

  std::vector<PathOverlay> overlays;
  nlohmann::ordered_json metrics_doc;
  if (plan.found()) {
    CompareConfig compare;
    compare.planner = c.planner;
    compare.fixed_weight = c.fixed_weight;
    const auto rows = compare_methods(map, *fields, cvars, compare);
    metrics_doc["metrics"] = metrics_to_json(path_metrics(plan.path, map, *fields));
    metrics_doc["comparison"] = metrics_rows_to_json(rows);
    const std::string table = metrics_table(rows);
    write_file(out_path(c, "metrics.txt"), table);
    ctx.out << table;
    for (const auto& r : rows) overlays.push_back({method_name(r.method), r.plan.path, method_color(r.method)});
  } else {
    metrics_doc["metrics"] = nullptr;
  }
  write_file(out_path(c, "metrics.json"), with_config(std::move(metrics_doc), c).dump(2) + "\n");

  RenderSpec spec{map, field, std::move(overlays), c.cell_pixels, c.to_json().dump()};
  write_file(out_path(c, "overlay.svg"), render_overlay_svg(spec));

  if (!plan.found()) {
    ctx.err << "no path between start and goal\n";
    return kNoPath;
  }
  ctx.out << fmt::format("combined cost {:.4f}, length {:.4f}, expansions anchor={} aux={}\n",
                         plan.combined_cost, plan.geometric_length, plan.expansions.anchor,
                         plan.expansions.aux);
  if (c.threshold) {
    const double repulsive = plan.combined_cost - plan.geometric_length;
    if (repulsive > *c.threshold) {
      ctx.err << fmt::format(
          "no feasible path: repulsive cost {:.4f} exceeds threshold {:.4f} (combined {:.4f}, length {:.4f})\n",
          repulsive, *c.threshold, plan.combined_cost, plan.geometric_length);
      return kNoPath;
    }
  }
  return kOk;
}

int cmd_ablate(Context& ctx) {
  const auto& c = ctx.config;
  require(!c.map_path.empty(), "--map is required");
  require(!c.ks.empty(), "--ks must list at least one shot count");
  require(c.mode != SensorMode::Cache, "ablation needs a live or mock sensor, not a cache file");
  const SemanticMap map = load_map_file(c.map_path);
  const Prompt prompt = make_prompt(c, map);

  ShotSampler sampler = [&](int k, std::uint64_t run_seed) {
    if (c.mode == SensorMode::Mock) {
      return sample_mock(run_seed, prompt, k, c.mock.per_class, c.mock.default_params);
    }
    SensorConfig s = c.sensor;
    s.k = k;
    return sample_llm(s, prompt);
  };
  const auto report = ablate_shots(prompt, c.ks, c.runs, sampler, c.bootstrap, c.bootstrap.seed);
  nlohmann::ordered_json doc;
  doc["rows"] = ablation_to_json(report, map.class_names());
  write_file(out_path(c, "ablation.json"), with_config(std::move(doc), c).dump(2) + "\n");

  std::string table = fmt::format("{:<14} {:>4} {:>5} {:>10} {:>10}\n", "class", "k", "runs", "CVaR mean", "CVaR std");
  for (const auto& name : map.class_names()) {
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
      const auto& xs = report.per_k_cvar.at(name)[i];
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= double(xs.size());
      const auto& d = report.dispersion.at(name)[i];
      table += fmt::format("{:<14} {:>4} {:>5} {:>10.4f} {:>10}\n", name, report.ks[i], report.runs, mean,
                           d ? fmt::format("{:.4f}", *d) : std::string("-"));
    }
  }
  ctx.out << table;

  // Timing table (wall-clock, so kept out of ablation.json).
  std::unique_ptr<ChatTransport> transport;
  if (c.mode == SensorMode::Mock) {
    transport = std::make_unique<MockChatTransport>(c.bootstrap.seed, map.class_names(), c.mock.per_class,
                                                    std::chrono::milliseconds(c.mock.delay_ms));
  } else {
    const char* key = std::getenv(c.sensor.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw SensorError(SensorErrorKind::MissingCredentials,
                        "environment variable " + c.sensor.api_key_env + " is not set");
    }
    transport = std::make_unique<HttpChatTransport>(c.sensor.endpoint, key, c.sensor.timeout_s);
  }
  const auto latency = measure_shot_latency(c.sensor, prompt, c.ks, c.runs, *transport);
  std::string timing = fmt::format("{:>4} {:>5} {:>10} {:>10} {:>14}\n", "k", "runs", "mean [s]", "std [s]", "mean/shot [s]");
  nlohmann::ordered_json lat = nlohmann::ordered_json::array();
  for (const auto& row : latency) {
    timing += fmt::format("{:>4} {:>5} {:>10.4f} {:>10.4f} {:>14.4f}\n", row.k, row.runs, row.mean_s, row.std_s,
                          row.mean_per_shot_s);
    lat.push_back({{"k", row.k}, {"runs", row.runs}, {"mean_s", row.mean_s}, {"std_s", row.std_s},
                   {"mean_per_shot_s", row.mean_per_shot_s}});
  }
  nlohmann::ordered_json lat_doc;
  lat_doc["latency"] = std::move(lat);
  write_file(out_path(c, "latency.json"), with_config(std::move(lat_doc), c).dump(2) + "\n");
  write_file(out_path(c, "latency.txt"), timing);
  ctx.out << timing;
  return kOk;
}

int cmd_render(Context& ctx) {
  const auto& c = ctx.config;
  require(!c.map_path.empty(), "--map is required");
  const SemanticMap map = load_map_file(c.map_path);
  const auto posteriors = acquire_posteriors(c, map);
  CostFieldConfig field_config = c.field;
  field_config.gamma = c.planner.gamma;
  field_config.alpha = c.bootstrap.alpha;
  const CostField field =
      build_cost_field(map, all_distance_fields(map), scale_lambdas(map.classes(), cvars_of(posteriors)), field_config);

  static constexpr const char* kPalette[] = {"#3cb44b", "#e6194b", "#f58231", "#911eb4", "#46f0f0"};
  std::vector<PathOverlay> overlays;
  for (std::size_t i = 0; i < c.plan_paths.size(); ++i) {
    const auto doc = read_json_file(c.plan_paths[i]);
    if (!doc.contains("path") || !doc["path"].is_array()) {
      throw ConfigError(c.plan_paths[i].string() + " has no path array");
    }
    PathOverlay overlay;
    overlay.label = c.plan_paths[i].stem().string();
    overlay.color = kPalette[i % std::size(kPalette)];
    for (const auto& p : doc["path"]) {
      if (!p.is_array() || p.size() != 2) throw ConfigError("malformed path vertex in " + c.plan_paths[i].string());
      overlay.path.push_back({p[0].get<int>(), p[1].get<int>()});
    }
    overlays.push_back(std::move(overlay));
  }
  RenderSpec spec{map, field, std::move(overlays), c.cell_pixels, c.to_json().dump()};
  const auto svg_path = out_path(c, "overlay.svg");
  const auto pgm_path = out_path(c, "field.pgm");
  write_file(svg_path, render_overlay_svg(spec));
  write_file(pgm_path, render_field_pgm(spec));
  ctx.out << "wrote " << svg_path.generic_string() << " and " << pgm_path.generic_string() << '\n';
  return kOk;
}

}  // namespace

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompt-conditioned, risk-aware grid path planning"};
  app.name(args.empty() ? "semplan" : args.front());
  app.fallthrough();
  app.require_subcommand(1);

  std::optional<std::string> config_path, map, prompt, cache, posterior, out_dir, baseline, ks;
  std::optional<int> k, resamples, runs, cell_pixels, connectivity;
  std::optional<double> alpha, gamma, w1, w2, delta_ell, threshold;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> plans;
  bool mock = false;

  app.add_option("--config", config_path, "JSON run configuration; flags override its values");
  app.add_option("--map", map, "Map document (JSON)");
  app.add_option("--prompt", prompt, "Natural-language prompt");
  app.add_option("--k", k, "Shots per prompt");
  app.add_option("--R", resamples, "Bootstrap resamples");
  app.add_option("--alpha", alpha, "CVaR level in (0, 1)");
  app.add_option("--gamma", gamma, "Semantic cost weight");
  app.add_option("--seed", seed, "Seed for the mock sensor and the bootstrap");
  app.add_flag("--mock", mock, "Use the seeded mock sensor");
  app.add_option("--cache", cache, "Read sensor readings from a recorded sample file");
  app.add_option("--posterior", posterior, "Use an exported posterior instead of sampling");
  app.add_option("--w1", w1, "Heuristic inflation");
  app.add_option("--w2", w2, "Auxiliary admission factor");
  app.add_option("--delta-ell", delta_ell, "Auxiliary heuristic sampling step (cells)");
  app.add_option("--connectivity", connectivity, "Grid connectivity (4 or 8)");
  app.add_option("--threshold", threshold, "Report no feasible path when combined - length exceeds this");
  app.add_option("--baseline", baseline, "Plan with a baseline instead: astar or fixed");
  app.add_option("--ks", ks, "Comma-separated shot counts for ablate");
  app.add_option("--runs", runs, "Repetitions per shot count for ablate");
  app.add_option("--plan", plans, "Plan JSON files to overlay (render)");
  app.add_option("--cell-pixels", cell_pixels, "Pixels per cell in rendered images");
  app.add_option("--out", out_dir, "Output directory");

  auto* sample = app.add_subcommand("sample", "Query the sensor and record readings");
  auto* posterior_cmd = app.add_subcommand("posterior", "Bootstrap posterior and CVaR per class");
  auto* plan = app.add_subcommand("plan", "Full pipeline: posterior, cost field, plan, metrics, figure");
  auto* ablate = app.add_subcommand("ablate", "Posterior dispersion and latency versus shot count");
  auto* render = app.add_subcommand("render", "Render the cost field and optional plans");

  // CLI11 takes the arguments reversed and without the program name.
  std::vector<std::string> rev;
  for (std::size_t i = args.size(); i > 1; --i) rev.push_back(args[i - 1]);
  try {
    app.parse(std::move(rev));
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig c;
    if (config_path) apply_config_json(c, read_json_file(*config_path));
    if (map) c.map_path = *map;
    if (prompt) c.prompt_text = *prompt;
    if (k) c.sensor.k = *k;
    if (resamples) c.bootstrap.resamples = *resamples;
    if (alpha) c.bootstrap.alpha = *alpha;
    if (gamma) c.planner.gamma = *gamma;
    if (seed) c.bootstrap.seed = *seed;
    if (cache) {
      c.cache_path = *cache;
      c.mode = SensorMode::Cache;
    }
    if (mock) c.mode = SensorMode::Mock;
    if (posterior) c.posterior_path = *posterior;
    if (w1) c.planner.w1 = *w1;
    if (w2) c.planner.w2 = *w2;
    if (delta_ell) c.planner.delta_ell = *delta_ell;
    if (connectivity) {
      require(*connectivity == 4 || *connectivity == 8, "--connectivity must be 4 or 8");
      c.planner.connectivity = *connectivity == 4 ? Connectivity::Four : Connectivity::Eight;
    }
    if (threshold) c.threshold = *threshold;
    if (baseline) c.baseline = parse_baseline(*baseline);
    if (ks) c.ks = parse_ks(*ks);
    if (runs) c.runs = *runs;
    for (const auto& p : plans) c.plan_paths.emplace_back(p);
    if (cell_pixels) c.cell_pixels = *cell_pixels;
    if (out_dir) c.out_dir = *out_dir;

    c.sensor.validate();
    c.bootstrap.validate();
    c.planner.validate();
    require(c.runs >= 1, "--runs must be >= 1");

    Context ctx{c, out, err};
    if (sample->parsed()) return cmd_sample(ctx);
    if (posterior_cmd->parsed()) return cmd_posterior(ctx);
    if (plan->parsed()) return cmd_plan(ctx);
    if (ablate->parsed()) return cmd_ablate(ctx);
    if (render->parsed()) return cmd_render(ctx);
    return kConfigError;
  } catch (const MapError& e) {
    err << "map error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SensorError& e) {
    err << "sensor error: " << e.what() << '\n';
    return kSensorFailure;
  } catch (const PlanningError& e) {
    err << "planning error: " << e.what() << '\n';
    return kNoPath;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace semplan::cli

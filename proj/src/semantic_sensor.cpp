#include "semplan/semantic_sensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "semplan/errors.hpp"
#include "semplan/random.hpp"

namespace semplan {

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Prompt / SampleSet

Prompt::Prompt(std::string text, std::vector<std::string> class_names)
    : text_(std::move(text)), class_names_(std::move(class_names)) {
  if (text_.empty()) throw ConfigError("prompt text must be non-empty");
  if (class_names_.empty()) throw ConfigError("prompt must name at least one class");
  std::set<std::string_view> seen;
  for (const auto& n : class_names_) {
    if (n.empty()) throw ConfigError("class names must be non-empty");
    if (!seen.insert(n).second) throw ConfigError("duplicate class name '" + n + "' in prompt");
  }
}

std::string Prompt::digest() const {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("cannot initialise SHA-256");
  }
  // Length-prefixed fields so ("ab","c") and ("a","bc") differ.
  auto feed = [&](std::string_view s) {
    const std::uint64_t n = s.size();
    unsigned char len[8];
    for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(n >> (8 * i));
    EVP_DigestUpdate(ctx.get(), len, sizeof len);
    EVP_DigestUpdate(ctx.get(), s.data(), s.size());
  };
  feed(text_);
  for (const auto& n : class_names_) feed(n);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int md_len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &md_len);
  std::string hex;
  hex.reserve(2 * md_len);
  for (unsigned int i = 0; i < md_len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::Live: return "live";
    case Provenance::Cached: return "cached";
    case Provenance::Mock: return "mock";
  }
  return "unknown";
}

const std::vector<double>& SampleSet::readings(std::string_view label) const {
  for (const auto& [name, values] : per_class) {
    if (name == label) return values;
  }
  throw ConfigError("sample set has no readings for class '" + std::string(label) + "'");
}

bool same_readings(const SampleSet& a, const SampleSet& b) {
  return a.prompt_digest == b.prompt_digest && a.k == b.k && a.temperature == b.temperature &&
         a.per_class == b.per_class;
}

void SensorConfig::validate() const {
  if (k < 1) throw ConfigError(fmt::format("shot count k must be >= 1, got {}", k));
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (!(timeout_s > 0.0)) throw ConfigError("timeout must be positive");
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (!(retry_backoff_s >= 0.0)) throw ConfigError("retry backoff must be >= 0");
}

// ---------------------------------------------------------------------------
// Prompt text and reply parsing

std::string build_rating_prompt(const Prompt& prompt) {
  std::string keys;
  std::string example;
  for (std::size_t i = 0; i < prompt.class_names().size(); ++i) {
    const auto quoted = nlohmann::json(prompt.class_names()[i]).dump();
    keys += (i ? ", " : "") + quoted;
    example += (i ? ", " : "") + quoted + ": <number>";
  }
  std::string text;
  text += "You are a safety assessor for a mobile robot that must navigate a site.\n";
  text += "Read the user's message and rate, for each obstacle class, how dangerous or "
          "disruptive it would be for the robot to pass close to it right now.\n";
  text += "Obstacle classes: " + keys + ".\n";
  text += "Respond with only a JSON object that maps every class name above to a number "
          "between 0 and 1 (0 = safe to pass closely, 1 = must be avoided). "
          "Do not add any other text.\n";
  text += "Format: {" + example + "}\n";
  text += "User message: " + prompt.text();
  return text;
}

std::vector<double> parse_ratings(std::string_view content, const Prompt& prompt) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error&) {
    throw SensorError(SensorErrorKind::MalformedCompletion,
                      "completion is not a JSON object: " + std::string(content.substr(0, 200)));
  }
  if (!obj.is_object()) {
    throw SensorError(SensorErrorKind::MalformedCompletion, "completion is not a JSON object");
  }
  std::vector<double> out;
  out.reserve(prompt.class_names().size());
  for (const auto& name : prompt.class_names()) {
    auto it = obj.find(name);
    if (it == obj.end()) {
      throw SensorError(SensorErrorKind::MalformedCompletion,
                        "completion is missing a rating for '" + name + "'");
    }
    if (!it->is_number()) {
      throw SensorError(SensorErrorKind::MalformedCompletion,
                        "rating for '" + name + "' is not numeric");
    }
    const double v = it->get<double>();
    if (std::isnan(v)) {
      throw SensorError(SensorErrorKind::MalformedCompletion, "rating for '" + name + "' is NaN");
    }
    out.push_back(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// HTTP transport

HttpChatTransport::HttpChatTransport(std::string endpoint, std::string api_key, double timeout_s)
    : api_key_(std::move(api_key)), timeout_s_(timeout_s) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint must be an absolute http(s) URL: " + endpoint);
  }
  const auto path_begin = endpoint.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) {
    scheme_host_port_ = endpoint;
    path_ = "/";
  } else {
    scheme_host_port_ = endpoint.substr(0, path_begin);
    path_ = endpoint.substr(path_begin);
  }
}

nlohmann::json HttpChatTransport::request_body(const ChatRequest& request) {
  nlohmann::json body;
  body["model"] = request.model;
  body["temperature"] = request.temperature;
  body["messages"] = nlohmann::json::array({
      {{"role", "system"}, {"content", request.system_message}},
      {{"role", "user"}, {"content", request.user_message}},
  });
  if (request.n != 1) body["n"] = request.n;
  body["response_format"] = {{"type", "json_object"}};
  return body;
}

std::vector<std::string> HttpChatTransport::parse_response_body(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw SensorError(SensorErrorKind::MalformedCompletion, "response body is not JSON");
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw SensorError(SensorErrorKind::MalformedCompletion, "response has no choices");
  }
  std::vector<std::string> out;
  for (const auto& choice : j["choices"]) {
    const auto* content = choice.contains("message") ? &choice["message"] : nullptr;
    if (!content || !content->contains("content") || !(*content)["content"].is_string()) {
      throw SensorError(SensorErrorKind::MalformedCompletion, "choice has no message content");
    }
    out.push_back((*content)["content"].get<std::string>());
  }
  return out;
}

std::vector<std::string> HttpChatTransport::complete(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(timeout_s_);
  const auto usecs = static_cast<time_t>((timeout_s_ - double(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(path_, headers, request_body(request).dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout;
    throw SensorError(timed_out ? SensorErrorKind::Timeout : SensorErrorKind::Network,
                      "request to " + scheme_host_port_ + path_ + " failed: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw SensorError(SensorErrorKind::Network,
                      fmt::format("endpoint returned HTTP {}: {}", res->status, res->body.substr(0, 200)));
  }
  return parse_response_body(res->body);
}

// ---------------------------------------------------------------------------
// Mock transport

MockChatTransport::MockChatTransport(std::uint64_t seed, std::vector<std::string> class_names,
                                     std::map<std::string, std::pair<double, double>> beta_params,
                                     std::chrono::milliseconds delay)
    : seed_(seed), class_names_(std::move(class_names)), params_(std::move(beta_params)), delay_(delay) {}

std::vector<std::string> MockChatTransport::complete(const ChatRequest& request) {
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  std::vector<std::string> out;
  for (int c = 0; c < request.n; ++c) {
    Rng rng(substream_seed(seed_, calls_.fetch_add(1)));
    nlohmann::ordered_json reply;
    for (const auto& name : class_names_) {
      auto it = params_.find(name);
      const auto [a, b] = it == params_.end() ? std::pair{2.0, 2.0} : it->second;
      reply[name] = rng.beta(a, b);
    }
    out.push_back(reply.dump());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

std::vector<double> one_shot(const SensorConfig& config, const Prompt& prompt,
                             ChatTransport& transport, const ChatRequest& request) {
  for (int attempt = 0;; ++attempt) {
    try {
      auto contents = transport.complete(request);
      if (contents.empty()) {
        throw SensorError(SensorErrorKind::MalformedCompletion, "empty completion");
      }
      return parse_ratings(contents.front(), prompt);
    } catch (const SensorError&) {
      if (attempt >= config.max_retries) throw;
      if (config.retry_backoff_s > 0.0) {
        std::this_thread::sleep_for(
            std::chrono::duration<double>(config.retry_backoff_s * std::ldexp(1.0, attempt)));
      }
    }
  }
}

SampleSet assemble(const SensorConfig& config, const Prompt& prompt,
                   const std::vector<std::vector<double>>& shots, Provenance provenance) {
  SampleSet set;
  set.prompt_digest = prompt.digest();
  set.k = config.k;
  set.temperature = config.temperature;
  set.provenance = provenance;
  for (std::size_t c = 0; c < prompt.class_names().size(); ++c) {
    std::vector<double> values;
    values.reserve(shots.size());
    for (const auto& shot : shots) values.push_back(shot[c]);
    std::sort(values.begin(), values.end());
    set.per_class.emplace_back(prompt.class_names()[c], std::move(values));
  }
  return set;
}

}  // namespace

SamplingTrace sample_llm_traced(const SensorConfig& config, const Prompt& prompt,
                                ChatTransport& transport) {
  config.validate();
  ChatRequest request;
  request.model = config.model_name;
  request.temperature = config.temperature;
  request.system_message = build_rating_prompt(prompt);
  request.user_message = prompt.text();

  SamplingTrace trace;
  const auto t0 = Clock::now();
  std::vector<std::vector<double>> shots;

  if (config.shot_mode == ShotMode::Batched) {
    ChatRequest batch = request;
    batch.n = config.k;
    std::vector<std::string> contents;
    for (int attempt = 0;; ++attempt) {
      try {
        contents = transport.complete(batch);
        break;
      } catch (const SensorError&) {
        if (attempt >= config.max_retries) throw;
      }
    }
    const double batch_s = seconds_since(t0);
    for (int i = 0; i < config.k; ++i) {
      const auto ts = Clock::now();
      try {
        if (static_cast<std::size_t>(i) >= contents.size()) {
          throw SensorError(SensorErrorKind::MalformedCompletion, "batch returned too few choices");
        }
        shots.push_back(parse_ratings(contents[static_cast<std::size_t>(i)], prompt));
        trace.shot_seconds.push_back(batch_s);
      } catch (const SensorError&) {
        if (config.max_retries == 0) throw;
        // Only the failed choice is re-requested.
        SensorConfig retry = config;
        retry.max_retries = config.max_retries - 1;
        shots.push_back(one_shot(retry, prompt, transport, request));
        trace.shot_seconds.push_back(batch_s + seconds_since(ts));
      }
    }
  } else {
    std::vector<std::future<std::pair<std::vector<double>, double>>> futures;
    futures.reserve(static_cast<std::size_t>(config.k));
    for (int i = 0; i < config.k; ++i) {
      futures.push_back(std::async(std::launch::async, [&] {
        const auto ts = Clock::now();
        auto ratings = one_shot(config, prompt, transport, request);
        return std::pair{std::move(ratings), seconds_since(ts)};
      }));
    }
    std::exception_ptr first_error;
    for (auto& f : futures) {
      try {
        auto [ratings, secs] = f.get();
        shots.push_back(std::move(ratings));
        trace.shot_seconds.push_back(secs);
      } catch (...) {
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  }

  trace.wall_seconds = seconds_since(t0);
  trace.samples = assemble(config, prompt, shots, transport.provenance());
  return trace;
}

SampleSet sample_llm(const SensorConfig& config, const Prompt& prompt, ChatTransport& transport) {
  return sample_llm_traced(config, prompt, transport).samples;
}

SampleSet sample_llm(const SensorConfig& config, const Prompt& prompt) {
  config.validate();
  const char* key = std::getenv(config.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw SensorError(SensorErrorKind::MissingCredentials,
                      "environment variable " + config.api_key_env + " is not set");
  }
  HttpChatTransport transport(config.endpoint, key, config.timeout_s);
  return sample_llm(config, prompt, transport);
}

SampleSet sample_mock(std::uint64_t seed, const Prompt& prompt, int k,
                      const std::map<std::string, std::pair<double, double>>& params,
                      std::pair<double, double> default_params) {
  if (k < 1) throw ConfigError(fmt::format("shot count k must be >= 1, got {}", k));
  SampleSet set;
  set.prompt_digest = prompt.digest();
  set.k = k;
  set.temperature = 1.0;
  set.provenance = Provenance::Mock;
  const auto& names = prompt.class_names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    auto it = params.find(names[c]);
    const auto [a, b] = it == params.end() ? default_params : it->second;
    if (!(a > 0.0) || !(b > 0.0)) {
      throw ConfigError(fmt::format("Beta shape parameters for '{}' must be positive", names[c]));
    }
    Rng rng(substream_seed(seed, c));
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) values.push_back(std::clamp(rng.beta(a, b), 0.0, 1.0));
    std::sort(values.begin(), values.end());
    set.per_class.emplace_back(names[c], std::move(values));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Cache

nlohmann::ordered_json sample_set_to_json(const SampleSet& set) {
  nlohmann::ordered_json j;
  j["prompt_digest"] = set.prompt_digest;
  j["k"] = set.k;
  j["temperature"] = set.temperature;
  j["provenance"] = std::string(to_string(set.provenance));
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (const auto& [name, values] : set.per_class) per_class[name] = values;
  j["per_class"] = std::move(per_class);
  return j;
}

void cache_store(const SampleSet& set, const std::filesystem::path& path,
                 const nlohmann::ordered_json& extra) {
  auto j = sample_set_to_json(set);
  if (!extra.is_null()) j["config"] = extra;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SensorError(SensorErrorKind::Io, "cannot write cache file " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw SensorError(SensorErrorKind::Io, "failed writing cache file " + path.string());
}

SampleSet cache_load(const std::filesystem::path& path, const Prompt& prompt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SensorError(SensorErrorKind::Io, "cannot open cache file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();

  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw SensorError(SensorErrorKind::CacheParse,
                      "cache file " + path.string() + " is not valid JSON: " + e.what());
  }
  auto bad = [&](const std::string& why) {
    return SensorError(SensorErrorKind::CacheParse, "cache file " + path.string() + ": " + why);
  };
  if (!j.is_object() || !j.contains("prompt_digest") || !j["prompt_digest"].is_string() ||
      !j.contains("k") || !j["k"].is_number_integer() || !j.contains("per_class") ||
      !j["per_class"].is_object()) {
    throw bad("missing prompt_digest, k or per_class");
  }
  SampleSet set;
  set.prompt_digest = j["prompt_digest"].get<std::string>();
  if (set.prompt_digest != prompt.digest()) {
    throw SensorError(SensorErrorKind::DigestMismatch,
                      "cache file " + path.string() + " was recorded for a different prompt");
  }
  set.k = j["k"].get<int>();
  if (set.k < 1) throw bad("k must be >= 1");
  if (j.contains("temperature")) {
    if (!j["temperature"].is_number()) throw bad("temperature must be numeric");
    set.temperature = j["temperature"].get<double>();
  }
  set.provenance = Provenance::Cached;
  const auto& per_class = j["per_class"];
  for (const auto& name : prompt.class_names()) {
    if (!per_class.contains(name)) throw bad("no readings for class '" + name + "'");
    const auto& arr = per_class[name];
    if (!arr.is_array() || arr.size() != static_cast<std::size_t>(set.k)) {
      throw bad(fmt::format("class '{}' must have exactly k={} readings", name, set.k));
    }
    std::vector<double> values;
    for (const auto& v : arr) {
      if (!v.is_number()) throw bad("non-numeric reading for '" + name + "'");
      const double x = v.get<double>();
      if (!(x >= 0.0 && x <= 1.0)) throw bad("reading outside [0, 1] for '" + name + "'");
      values.push_back(x);
    }
    std::sort(values.begin(), values.end());
    set.per_class.emplace_back(name, std::move(values));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Latency harness

std::vector<LatencyRow> measure_shot_latency(const SensorConfig& config, const Prompt& prompt,
                                             const std::vector<int>& ks, int runs,
                                             ChatTransport& transport) {
  if (runs <= 0) throw ConfigError("latency measurement needs at least one run");
  if (ks.empty()) throw ConfigError("latency measurement needs at least one shot count");
  std::vector<LatencyRow> rows;
  for (const int k : ks) {
    SensorConfig cfg = config;
    cfg.k = k;
    cfg.validate();
    std::vector<double> walls;
    double shot_sum = 0.0;
    std::size_t shot_count = 0;
    for (int r = 0; r < runs; ++r) {
      const auto trace = sample_llm_traced(cfg, prompt, transport);
      walls.push_back(trace.wall_seconds);
      for (double s : trace.shot_seconds) shot_sum += s;
      shot_count += trace.shot_seconds.size();
    }
    LatencyRow row;
    row.k = k;
    row.runs = runs;
    for (double w : walls) row.mean_s += w;
    row.mean_s /= double(runs);
    if (runs > 1) {
      double ss = 0.0;
      for (double w : walls) ss += (w - row.mean_s) * (w - row.mean_s);
      row.std_s = std::sqrt(ss / double(runs - 1));
    }
    row.mean_per_shot_s = shot_count ? shot_sum / double(shot_count) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace semplan

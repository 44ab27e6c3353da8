#pragma once

// LLM-as-sensor: k independent "danger" ratings per obstacle class.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace semplan {

/// Natural-language instruction plus the labels the sensor must rate.
class Prompt {
public:
  /// Throws ConfigError if text is empty or class names are empty / duplicated.
  Prompt(std::string text, std::vector<std::string> class_names);

  const std::string& text() const noexcept { return text_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }

  /// Hex SHA-256 over the text and the ordered class names.
  std::string digest() const;

private:
  std::string text_;
  std::vector<std::string> class_names_;
};

enum class Provenance { Live, Cached, Mock };

std::string_view to_string(Provenance p) noexcept;

struct SampleSet {
  std::string prompt_digest;
  /// Class label -> k readings in [0, 1], sorted ascending. Kept in prompt order.
  std::vector<std::pair<std::string, std::vector<double>>> per_class;
  int k = 0;
  double temperature = 1.0;
  Provenance provenance = Provenance::Mock;

  /// Throws ConfigError when the label is absent.
  const std::vector<double>& readings(std::string_view label) const;
};

/// Equality ignoring provenance.
bool same_readings(const SampleSet& a, const SampleSet& b);

enum class ShotMode {
  /// One request per shot (default).
  Independent,
  /// A single request asking for k choices.
  Batched,
};

struct SensorConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-4o-mini";
  int k = 16;
  double temperature = 1.0;
  int max_retries = 3;
  double timeout_s = 30.0;
  double retry_backoff_s = 0.25;
  std::string api_key_env = "OPENAI_API_KEY";
  ShotMode shot_mode = ShotMode::Independent;

  /// Throws ConfigError on k < 1, max_retries < 0, timeout <= 0.
  void validate() const;
};

/// System message instructing the model to answer with one JSON object of
/// label -> rating in [0, 1]. Deterministic.
std::string build_rating_prompt(const Prompt& prompt);

/// Parses a completion into per-class ratings in prompt order, clamped to [0, 1].
/// Throws SensorError(MalformedCompletion) if the content is not a bare JSON
/// object, a class is missing, or a rating is non-numeric.
std::vector<double> parse_ratings(std::string_view content, const Prompt& prompt);

struct ChatRequest {
  std::string model;
  double temperature = 1.0;
  std::string system_message;
  std::string user_message;
  /// Number of choices requested in this call.
  int n = 1;
};

/// Pluggable completion backend. Must be safe to call from several threads.
class ChatTransport {
public:
  virtual ~ChatTransport() = default;
  /// Returns the message content of each returned choice. Throws SensorError
  /// (Network / Timeout) on transport failure.
  virtual std::vector<std::string> complete(const ChatRequest& request) = 0;
  virtual Provenance provenance() const noexcept { return Provenance::Live; }
};

/// OpenAI-style chat-completions endpoint over HTTP(S).
class HttpChatTransport final : public ChatTransport {
public:
  HttpChatTransport(std::string endpoint, std::string api_key, double timeout_s);
  std::vector<std::string> complete(const ChatRequest& request) override;

  static nlohmann::json request_body(const ChatRequest& request);
  /// Extracts choices[*].message.content; throws SensorError(MalformedCompletion).
  static std::vector<std::string> parse_response_body(std::string_view body);

private:
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
  double timeout_s_;
};

/// Answers with seeded Beta draws after an optional fixed delay. Used for
/// offline runs and latency harnesses.
class MockChatTransport final : public ChatTransport {
public:
  /// Classes missing from `beta_params` draw from Beta(2, 2).
  MockChatTransport(std::uint64_t seed, std::vector<std::string> class_names,
                    std::map<std::string, std::pair<double, double>> beta_params = {},
                    std::chrono::milliseconds delay = std::chrono::milliseconds(0));
  std::vector<std::string> complete(const ChatRequest& request) override;
  Provenance provenance() const noexcept override { return Provenance::Mock; }

private:
  std::uint64_t seed_;
  std::vector<std::string> class_names_;
  std::map<std::string, std::pair<double, double>> params_;
  std::chrono::milliseconds delay_;
  std::atomic_uint64_t calls_{0};
};

struct SamplingTrace {
  SampleSet samples;
  /// Wall time of each shot in seconds, including retries.
  std::vector<double> shot_seconds;
  double wall_seconds = 0.0;
};

/// Fans out config.k shots concurrently through `transport`, retrying only
/// failed shots. Readings are clamped and sorted per class.
SamplingTrace sample_llm_traced(const SensorConfig& config, const Prompt& prompt,
                                ChatTransport& transport);
SampleSet sample_llm(const SensorConfig& config, const Prompt& prompt, ChatTransport& transport);
/// Live sampling over HTTP; the API key is read from config.api_key_env.
SampleSet sample_llm(const SensorConfig& config, const Prompt& prompt);

/// k seeded Beta(a, b) draws per class. Classes absent from `params` use
/// `default_params`.
SampleSet sample_mock(std::uint64_t seed, const Prompt& prompt, int k,
                      const std::map<std::string, std::pair<double, double>>& params,
                      std::pair<double, double> default_params = {2.0, 2.0});

nlohmann::ordered_json sample_set_to_json(const SampleSet& set);
void cache_store(const SampleSet& set, const std::filesystem::path& path,
                 const nlohmann::ordered_json& extra = nullptr);
SampleSet cache_load(const std::filesystem::path& path, const Prompt& prompt);

struct LatencyRow {
  int k = 0;
  int runs = 0;
  double mean_s = 0.0;
  double std_s = 0.0;
  /// Mean duration of an individual shot.
  double mean_per_shot_s = 0.0;
};

std::vector<LatencyRow> measure_shot_latency(const SensorConfig& config, const Prompt& prompt,
                                             const std::vector<int>& ks, int runs,
                                             ChatTransport& transport);

}  // namespace semplan

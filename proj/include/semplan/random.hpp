#pragma once

#include <cstdint>
#include <random>

namespace semplan {

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for substream `index` of a run seeded with `seed`.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Seeded generator. Variates are built directly from the mt19937_64 bit
/// stream rather than through <random> distribution objects.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1].
  double uniform_open_low() noexcept { return 1.0 - uniform(); }

  double standard_exponential() noexcept;
  double standard_normal() noexcept;
  /// Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape) noexcept;
  /// Beta(a, b) from two gamma variates; a, b > 0.
  double beta(double a, double b) noexcept;

  std::uint64_t next_u64() noexcept { return engine_(); }

private:
  std::mt19937_64 engine_;
};

}  // namespace semplan

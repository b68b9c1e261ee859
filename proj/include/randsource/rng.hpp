#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace randsource {

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so parallel loops produce the same numbers for any
/// thread count or iteration order.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const noexcept {
    std::uint64_t h = mix(seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1));
    h = mix(h ^ (0xD1B54A32D192ED03ULL * (counter + 1)));
    return mix(h + stream);
  }

  /// Uniform on (0, 1].
  [[nodiscard]] double uniform(std::uint64_t stream, std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(stream, counter) >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Two independent standard normals (Box-Muller) from one counter slot.
  [[nodiscard]] std::pair<double, double> normal_pair(std::uint64_t stream,
                                                      std::uint64_t counter) const noexcept {
    const double u1 = uniform(stream, 2 * counter);
    const double u2 = uniform(stream, 2 * counter + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  [[nodiscard]] constexpr std::uint64_t seed() const noexcept { return seed_; }

 private:
  // SplitMix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace randsource

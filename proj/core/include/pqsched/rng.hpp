#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pqsched {

// Independent substreams of one path. Changing the classifier only touches
// Classification, so arrivals and service requirements stay put.
enum class Substream : std::uint64_t {
  Interarrival = 1,
  TrueClass = 2,
  Service = 3,
  Classification = 4,
  Thinning = 5,
  Brownian = 6,
  Bootstrap = 7,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: draw i of a stream is mix(key + i * gamma).
/// Draws are a pure function of (seed, stream, index), which keeps every
/// replication reproducible regardless of which thread runs it.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Substream stream, std::uint64_t sub = 0) noexcept
      : key_(splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL + sub))) {}

  std::uint64_t next_u64() noexcept {
    return splitmix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on (0, 1]; never returns 0 so -log(u) is finite.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Inverse-CDF exponential draw.
  double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

  /// Box-Muller; the second variate is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pqsched

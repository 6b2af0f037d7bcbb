#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace aigikit {

/// splitmix64 stream. All randomness in the toolkit flows through explicit
/// seeds and this generator, so builds replay bit-exactly on any platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  /// Uniform double in [lo, hi), 53-bit resolution.
  double uniform(double lo, double hi);

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

 private:
  std::uint64_t state_;
};

/// Standard-normal stream (Box-Muller over a SplitMix64 source).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next();

 private:
  SplitMix64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

/// Order-independent sub-seed for per-record work: splitmix64 mix of the
/// manifest seed with a hash of the record/pair key.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view key);

std::string hex16(std::uint64_t v);

}  // namespace aigikit

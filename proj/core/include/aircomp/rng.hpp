#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace aircomp {

/// Seeded 64-bit generator with platform-independent derived draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on {0, ..., n-1}; n must be > 0.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(uniform01() * static_cast<double>(n));
  }

 private:
  std::mt19937_64 engine_;
};

enum class Stream : std::uint64_t {
  Arrivals = 1,
  Placement = 2,
  Policy = 3,
};

/// Independent substream seed for (root, stream, index), so that adding a
/// user never perturbs another user's draws.
std::uint64_t derive_seed(std::uint64_t root, Stream stream, std::uint64_t index);

}  // namespace aircomp

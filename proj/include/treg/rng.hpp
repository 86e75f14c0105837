#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace treg {

// Seeded random source over std::mt19937_64 with hand-written mappings to
// real distributions. Identical seeds give identical streams everywhere.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on the open interval (-bound, +bound).
  double symmetric_uniform(double bound) {
    for (;;) {
      const double v = bound * (2.0 * uniform01() - 1.0);
      if (v > -bound && v < bound) return v;
    }
  }

  // Box-Muller; the second variate of each pair is cached.
  double normal(double mean, double stddev) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform01()));
    const double angle = 2.0 * std::numbers::pi * uniform01();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return mean + stddev * radius * std::cos(angle);
  }

  // Uniform integer in [0, n). Rejection sampling.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    for (;;) {
      const std::uint64_t v = engine_();
      if (v < limit) return v % n;
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace treg

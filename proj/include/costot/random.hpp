#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace costot {

// Seeded generator for one chain. Uniform draws are derived from the raw
// 64-bit engine output so results do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  std::size_t uniform_int(std::size_t n) {
    auto r = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return r < n ? r : n - 1;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Draw an index with probability proportional to weights[i]; `total` is
  // the sum of the weights.
  std::size_t categorical(std::span<const double> weights, double total) {
    double u = uniform() * total;
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last = i;
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return last;
  }

  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    return categorical(weights, total);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace costot

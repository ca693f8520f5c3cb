// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace dnnpart {

/// Seeded 64-bit stream used for every random decision in the tool.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Bounded draws use rejection sampling on the raw 64-bit output
/// (never std::uniform_int_distribution, which differs between standard
/// libraries), so a given seed yields the same decisions on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n). Requires n > 0.
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t reject_below = (0 - bound) % bound;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= reject_below) return static_cast<std::size_t>(x % bound);
    }
  }

  /// Uniform in [lo, hi] (inclusive). Requires lo <= hi.
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }

  /// Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dnnpart

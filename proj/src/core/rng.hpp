// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

#include "core/common.hpp"

namespace duocolor {

// Deterministic generator with explicit output mapping. The standard
// <random> distributions are implementation-defined, so uniform/normal
// draws are produced here directly to keep traces reproducible across
// standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix(seed + 0x9e3779b97f4a7c15ull)) {}

  uint64_t next_u64() {
    // xorshift*; state seeded via splitmix so seed=0 is fine
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dull;
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int64_t uniform_int(int64_t lo, int64_t hi_inclusive) {
    check_arg(hi_inclusive >= lo, "uniform_int: empty range");
    uint64_t span = static_cast<uint64_t>(hi_inclusive - lo) + 1;
    return lo + static_cast<int64_t>(next_u64() % span);
  }

  // Box-Muller without caching, so the draw count per call is fixed.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double mean, double std) { return mean + std * normal(); }

  // Normal clipped by redrawing outside +/-2 std, as used for weight init.
  double trunc_normal(double std) {
    double v = normal();
    while (std::abs(v) > 2.0) v = normal();
    return v * std;
  }

  // Independent stream derived from this seed; order-insensitive.
  Rng child(uint64_t stream) const { return Rng(splitmix(state_ ^ splitmix(stream))); }

  template <typename It>
  void shuffle(It first, It last) {
    int64_t n = static_cast<int64_t>(last - first);
    for (int64_t i = n - 1; i > 0; --i) {
      int64_t j = uniform_int(0, i);
      std::swap(first[i], first[j]);
    }
  }

 private:
  static uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  uint64_t state_;
};

}  // namespace duocolor

#pragma once

// Counter-based splittable RNG.  Every (seed, experiment, path) triple owns an
// independent splitmix64 stream, so Monte Carlo results are bit-reproducible
// for a given seed regardless of thread count or evaluation order.

#include <cmath>
#include <cstdint>

#include "common.hpp"

namespace levyfun {

inline uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

class Stream {
 public:
  explicit Stream(uint64_t state) : state_(state) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Uniform in [0, 1).
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller with a cached spare.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - next_unit();  // (0, 1]
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = 2.0 * pi * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  // Exponential with unit mean.
  double next_exponential() { return -std::log1p(-next_unit()); }

  // Poisson count by uniform multiplication; intended for small means
  // (time-step intensity), guarded against misuse.
  int next_poisson(double mean) {
    if (mean < 0.0 || mean > 50.0)
      throw domain_error("rng.next_poisson", "mean outside supported range [0, 50]");
    if (mean == 0.0) return 0;
    const double limit = std::exp(-mean);
    double prod = next_unit();
    int k = 0;
    while (prod > limit) {
      prod *= next_unit();
      ++k;
    }
    return k;
  }

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline Stream make_stream(uint64_t seed, uint64_t experiment, uint64_t path) {
  uint64_t s = mix64(seed ^ 0x5851F42D4C957F2DULL);
  s = mix64(s + 0x9E3779B97F4A7C15ULL * (experiment + 1));
  s = mix64(s + 0xD1B54A32D192ED03ULL * (path + 1));
  return Stream(s);
}

}  // namespace levyfun

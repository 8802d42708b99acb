#pragma once

#include <cmath>
#include <cstdint>

namespace chefshat {

// splitmix64 step; also the mixing function behind seed derivation.
inline uint64_t splitmix64_next(uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Seed split: master seed -> per-series seed -> per-match seed.
// Any match is replayable in isolation given its derived seed.
inline uint64_t split_seed(uint64_t parent, uint64_t index) {
  uint64_t s = parent ^ (0xD1B54A32D192ED03ull * (index + 1));
  return splitmix64_next(s);
}

// xoshiro256** seeded via splitmix64. Hand-rolled (instead of std::mt19937 +
// std::uniform_int_distribution) so that streams are identical across
// platforms and standard libraries; transcript byte-equality depends on it.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) {
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64_next(sm);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform integer in [0, n), n >= 1. Rejection sampling keeps it unbiased.
  uint64_t uniform_int(uint64_t n) {
    const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
    uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_double();
    double u2 = uniform_double();
    while (u1 <= 0.0) u1 = uniform_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace chefshat

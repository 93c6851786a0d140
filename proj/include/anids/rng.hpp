#pragma once

// Deterministic, splittable random streams. A Stream is keyed by up to
// three 64-bit values on top of the seed, so independent draws for
// (frame, atom) pairs are order-independent and replay bitwise across
// runs regardless of evaluation order or library version.

#include <cstdint>

#include "anids/la3.hpp"

namespace anids::rng {

inline uint64_t splitmix64(uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline uint64_t mix(uint64_t a, uint64_t b) {
  uint64_t s = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
  return splitmix64(s);
}

class Stream {
 public:
  explicit Stream(uint64_t seed) : state_(mix(seed, 0x5DEECE66DULL)) {}
  Stream(uint64_t seed, uint64_t k1) : state_(mix(mix(seed, 0x5DEECE66DULL), k1)) {}
  Stream(uint64_t seed, uint64_t k1, uint64_t k2) : state_(mix(Stream(seed, k1).state_, k2)) {}
  Stream(uint64_t seed, uint64_t k1, uint64_t k2, uint64_t k3)
      : state_(mix(Stream(seed, k1, k2).state_, k3)) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the second draw of each pair is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Vec3d gaussian3() {
    double x = gaussian();
    double y = gaussian();
    double z = gaussian();
    return {x, y, z};
  }

  // Haar-uniform rotation from a random unit quaternion.
  Mat3d rotation() {
    double w = gaussian(), x = gaussian(), y = gaussian(), z = gaussian();
    return rotation_from_quaternion(w, x, y, z);
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace anids::rng

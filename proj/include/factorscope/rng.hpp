#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace factorscope {

// splitmix64 mixing step; used to derive independent stream seeds from a base
// seed (e.g. the loading-matrix stream vs. per-replication path streams).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t base, std::uint64_t salt) {
  return splitmix64(base ^ splitmix64(salt));
}

// Deterministic random source. mt19937_64 is fully pinned by the standard and
// all transforms below are spelled out explicitly, so a given seed yields the
// same draw sequence on every build; std::normal_distribution is deliberately
// avoided because its algorithm is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1): 53 random mantissa bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // One Box-Muller draw per call (cosine branch, no cached spare): two
  // uniforms in, one normal out, so the draw order never depends on call
  // parity. u1 is shifted into (0, 1] to keep the log finite.
  double normal01() {
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal01(); }

  // Student t with 5 degrees of freedom: Z / sqrt(chi2_5 / 5), chi2_5 built
  // from five squared normals (six normals consumed per draw).
  double student_t5() {
    const double z = normal01();
    double w = 0.0;
    for (int i = 0; i < 5; ++i) {
      const double zi = normal01();
      w += zi * zi;
    }
    return z * std::sqrt(5.0 / w);
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace factorscope

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace sdiom {

// SplitMix64 finalizer; used to derive independent substream seeds from one
// master seed so that adding a consumer never shifts another stream.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return mix64(master ^ mix64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag1,
                                 std::uint64_t tag2) {
  return mix64(derive_seed(master, tag1) ^ mix64(tag2 + 0x632be59bd9b4e019ULL));
}

// mt19937_64 is fully pinned by the standard, so sequences are identical
// across platforms.  std::normal_distribution is not; Box-Muller below is.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return double(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller, cosine branch only.  Consumes exactly two uniforms per call.
  double gaussian(double mean = 0.0, double sd = 1.0) {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t next_u64() { return eng_(); }

  // Inclusive bounds.  Modulo bias is irrelevant for the small ranges used.
  int uniform_int(int lo, int hi) {
    return lo + int(next_u64() % std::uint64_t(hi - lo + 1));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace sdiom

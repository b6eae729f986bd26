#pragma once

// Reference PLV values computed without the library: direct phasor sums and a
// Monte Carlo null built on its own generator.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace oracle {

/// |mean(exp(i dphi))| accumulated in long double.
inline double plv_direct(std::span<const double> dphi) {
  long double c = 0, s = 0;
  for (double d : dphi) {
    c += std::cos(static_cast<long double>(d));
    s += std::sin(static_cast<long double>(d));
  }
  return static_cast<double>(std::sqrt(c * c + s * s) / dphi.size());
}

/// splitmix64: independent of the standard library engines the code under test uses.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Monte Carlo mean of |resultant| of `trials` uniform phases, over `reps` draws.
inline double mc_null_plv(int trials, int reps, std::uint64_t seed) {
  SplitMix rng(seed);
  long double total = 0;
  for (int r = 0; r < reps; ++r) {
    long double c = 0, s = 0;
    for (int k = 0; k < trials; ++k) {
      const long double phi = 2 * std::numbers::pi_v<long double> * rng.uniform();
      c += std::cos(phi);
      s += std::sin(phi);
    }
    total += std::sqrt(c * c + s * s) / trials;
  }
  return static_cast<double>(total / reps);
}

}  // namespace oracle

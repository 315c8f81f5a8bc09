#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace nambu {

/// Seeded random stream used everywhere randomness is needed.
///
/// The generator is pinned for reproducibility: a std::mt19937_64 engine
/// drives uniform doubles in [0,1) via the top 53 bits, and normal deviates
/// come from an explicit Box-Muller transform.  Identical seeds therefore
/// give bit-identical draws within one build of the library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard real normal N(0, 1).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(two_pi() * u2);
  }

  /// Standard complex normal: independent N(0, 1/2) real and imaginary
  /// parts, so E|z|^2 = 1.
  std::complex<double> complex_normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log1p(-u1));
    return {r * std::cos(two_pi() * u2), r * std::sin(two_pi() * u2)};
  }

 private:
  static constexpr double two_pi() { return 6.283185307179586476925286766559; }
  std::mt19937_64 engine_;
};

}  // namespace nambu

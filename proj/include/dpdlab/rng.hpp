#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace dpdlab {

/// Seeded source of uniform and Gaussian variates. Uniforms use the 53-bit
/// construction from two consecutive 32-bit Mersenne Twister outputs, so a
/// stream is reproducible across platforms and matches numpy's legacy
/// RandomState(seed).random_sample().
class RandomSource {
 public:
  explicit RandomSource(std::uint32_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    const double a = static_cast<double>(engine_() >> 5);
    const double b = static_cast<double>(engine_() >> 6);
    return (a * 67108864.0 + b) / 9007199254740992.0;
  }

  /// Circular complex Gaussian with unit variance per component
  /// (Box-Muller on two uniforms).
  std::complex<double> complex_normal();

  /// Real standard normal (real part of complex_normal; the imaginary part
  /// is discarded so each call consumes exactly two uniforms).
  double normal() { return complex_normal().real(); }

  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937 engine_;
};

}  // namespace dpdlab

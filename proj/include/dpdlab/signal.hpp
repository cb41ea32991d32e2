#pragma once
// Complex baseband sequences and the elementary operations on them: waveform
// synthesis, NMSE, integer-delay/complex-gain alignment and tap windows.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dpdlab {

using cplx = std::complex<double>;

/// Immutable, non-empty sequence of finite complex samples.
class ComplexSequence {
 public:
  explicit ComplexSequence(std::vector<cplx> samples, double sample_rate_hint = 1.0);

  std::span<const cplx> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double sample_rate_hint() const noexcept { return sample_rate_hint_; }
  cplx operator[](std::size_t n) const noexcept { return samples_[n]; }

  /// Copy of the samples for callers that need to build a derived sequence.
  std::vector<cplx> to_vector() const { return samples_; }

  friend bool operator==(const ComplexSequence&, const ComplexSequence&) = default;

 private:
  std::vector<cplx> samples_;
  double sample_rate_hint_;
};

/// Tap layout of a compensator input: `pre_taps` causal history samples,
/// `post_taps` lookahead samples and the current sample.
struct TapWindow {
  std::size_t pre_taps = 0;
  std::size_t post_taps = 0;

  std::size_t total() const noexcept { return pre_taps + post_taps + 1; }

  friend bool operator==(const TapWindow&, const TapWindow&) = default;
};

/// Half-open index range [begin, end).
struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
  bool empty() const noexcept { return end <= begin; }

  friend bool operator==(const SampleRange&, const SampleRange&) = default;
};

struct AlignmentResult {
  long delay = 0;
  cplx gain{1.0, 0.0};
};

/// Band-limited complex Gaussian waveform at unit RMS. White noise is passed
/// through a Hamming-windowed sinc low-pass (129 taps, cutoff
/// bandwidth_fraction/2 cycles per sample, unit DC gain).
ComplexSequence generate_waveform(std::uint32_t seed, std::size_t n_samples, double bandwidth_fraction);

/// 10 log10(|estimate - reference|^2 / |reference|^2), floored at -300 dB.
double nmse_db(std::span<const cplx> estimate, std::span<const cplx> reference);
double nmse_db(const ComplexSequence& estimate, const ComplexSequence& reference);

inline constexpr double kNmseFloorDb = -300.0;

/// Integer lag in [-max_lag, max_lag] maximizing |cross-correlation|, with
/// `measured[n] ~ gain * reference[n - delay]`, plus the least-squares gain
/// over the overlap.
AlignmentResult align(const ComplexSequence& reference, const ComplexSequence& measured, std::size_t max_lag);

/// Least-squares complex gain g minimizing |measured - g * reference|^2.
cplx ls_gain(std::span<const cplx> reference, std::span<const cplx> measured);

/// Shifts by `delay` samples (positive delays the sequence), zero-filling.
std::vector<cplx> shift(std::span<const cplx> x, long delay);

/// [x[n+post], ..., x[n], ..., x[n-pre]] with out-of-range taps set to zero.
std::vector<cplx> window_at(std::span<const cplx> x, std::size_t n, TapWindow w);

/// Allocation-free variant of window_at; `out` must hold w.total() values.
void window_into(std::span<const cplx> x, std::size_t n, TapWindow w, std::span<cplx> out) noexcept;

/// Peak-to-average power ratio in dB.
double papr_db(std::span<const cplx> x);

double rms(std::span<const cplx> x);

/// The q-quantile (0 < q <= 1) of |x[n]|, nearest-rank.
double amplitude_quantile(std::span<const cplx> x, double q);

}  // namespace dpdlab

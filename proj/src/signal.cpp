#include "dpdlab/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dpdlab/errors.hpp"
#include "dpdlab/rng.hpp"

namespace dpdlab {

std::complex<double> RandomSource::complex_normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  const double th = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(th), r * std::sin(th)};
}

ComplexSequence::ComplexSequence(std::vector<cplx> samples, double sample_rate_hint)
    : samples_(std::move(samples)), sample_rate_hint_(sample_rate_hint) {
  if (samples_.empty()) throw ArgumentError("ComplexSequence: at least one sample is required");
  if (!(sample_rate_hint_ > 0.0) || !std::isfinite(sample_rate_hint_)) {
    throw ArgumentError("ComplexSequence: sample-rate hint must be positive and finite");
  }
  for (std::size_t n = 0; n < samples_.size(); ++n) {
    if (!std::isfinite(samples_[n].real()) || !std::isfinite(samples_[n].imag())) {
      throw ArgumentError("ComplexSequence: non-finite sample at index " + std::to_string(n));
    }
  }
}

namespace {

constexpr std::size_t kFirHalfLength = 64;

std::vector<double> lowpass_taps(double bandwidth_fraction) {
  const double fc = bandwidth_fraction / 2.0;
  const std::size_t len = 2 * kFirHalfLength + 1;
  std::vector<double> h(len);
  double sum = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(kFirHalfLength);
    const double x = 2.0 * fc * t;
    const double sinc = (x == 0.0) ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len - 1));
    h[i] = 2.0 * fc * sinc * window;
    sum += h[i];
  }
  for (double& v : h) v /= sum;
  return h;
}

}  // namespace

ComplexSequence generate_waveform(std::uint32_t seed, std::size_t n_samples, double bandwidth_fraction) {
  if (!(bandwidth_fraction > 0.0 && bandwidth_fraction <= 1.0)) {
    throw ArgumentError("generate_waveform: bandwidth_fraction must lie in (0, 1]");
  }
  if (n_samples < 64) throw ArgumentError("generate_waveform: n_samples must be at least 64");

  const std::vector<double> h = lowpass_taps(bandwidth_fraction);
  RandomSource rng(seed);
  std::vector<cplx> white(n_samples + h.size() - 1);
  for (cplx& v : white) v = rng.complex_normal();

  std::vector<cplx> out(n_samples);
  double power = 0.0;
  for (std::size_t n = 0; n < n_samples; ++n) {
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
      re += white[n + j].real() * h[j];
      im += white[n + j].imag() * h[j];
    }
    out[n] = {re, im};
    power += re * re + im * im;
  }
  const double scale = 1.0 / std::sqrt(power / static_cast<double>(n_samples));
  for (cplx& v : out) v *= scale;
  return ComplexSequence(std::move(out));
}

double nmse_db(std::span<const cplx> estimate, std::span<const cplx> reference) {
  if (estimate.size() != reference.size()) {
    throw ArgumentError("nmse: length mismatch (" + std::to_string(estimate.size()) + " vs " +
                        std::to_string(reference.size()) + ")");
  }
  double err = 0.0, ref = 0.0;
  for (std::size_t n = 0; n < reference.size(); ++n) {
    err += std::norm(estimate[n] - reference[n]);
    ref += std::norm(reference[n]);
  }
  if (!(ref > 0.0)) throw ArgumentError("nmse: reference has zero energy");
  if (err == 0.0) return kNmseFloorDb;
  return std::max(kNmseFloorDb, 10.0 * std::log10(err / ref));
}

double nmse_db(const ComplexSequence& estimate, const ComplexSequence& reference) {
  return nmse_db(estimate.samples(), reference.samples());
}

cplx ls_gain(std::span<const cplx> reference, std::span<const cplx> measured) {
  if (reference.size() != measured.size()) throw ArgumentError("ls_gain: length mismatch");
  cplx num{0.0, 0.0};
  double den = 0.0;
  for (std::size_t n = 0; n < reference.size(); ++n) {
    num += std::conj(reference[n]) * measured[n];
    den += std::norm(reference[n]);
  }
  if (!(den > 0.0)) throw ArgumentError("ls_gain: reference has zero energy");
  return num / den;
}

AlignmentResult align(const ComplexSequence& reference, const ComplexSequence& measured, std::size_t max_lag) {
  const std::size_t n_ref = reference.size();
  const std::size_t n_meas = measured.size();
  if (n_ref <= 2 * max_lag || n_meas <= 2 * max_lag) {
    throw ArgumentError("align: both sequences must be longer than 2*max_lag");
  }
  const auto ref = reference.samples();
  const auto meas = measured.samples();

  // Overlap for lag d: measured index m in [lo, hi), reference index m - d.
  auto overlap = [&](long d) {
    const long lo = std::max(0L, d);
    const long hi = std::min(static_cast<long>(n_meas), static_cast<long>(n_ref) + d);
    return std::pair<long, long>{lo, hi};
  };

  const long lag = static_cast<long>(max_lag);
  long best_delay = 0;
  double best_mag = -1.0;
  for (long d = -lag; d <= lag; ++d) {
    const auto [lo, hi] = overlap(d);
    cplx acc{0.0, 0.0};
    for (long m = lo; m < hi; ++m) acc += std::conj(ref[m - d]) * meas[m];
    const double mag = std::abs(acc);
    if (mag > best_mag) {
      best_mag = mag;
      best_delay = d;
    }
  }

  const auto [lo, hi] = overlap(best_delay);
  cplx num{0.0, 0.0};
  double den = 0.0;
  double meas_energy = 0.0;
  for (long m = lo; m < hi; ++m) {
    num += std::conj(ref[m - best_delay]) * meas[m];
    den += std::norm(ref[m - best_delay]);
    meas_energy += std::norm(meas[m]);
  }
  if (!(den > 0.0) || !(meas_energy > 0.0)) throw ArgumentError("align: zero-energy input");
  const cplx gain = num / den;
  if (gain == cplx{0.0, 0.0} || !std::isfinite(gain.real()) || !std::isfinite(gain.imag())) {
    throw ArgumentError("align: degenerate gain estimate");
  }
  return {best_delay, gain};
}

std::vector<cplx> shift(std::span<const cplx> x, long delay) {
  const long n = static_cast<long>(x.size());
  std::vector<cplx> out(x.size(), cplx{0.0, 0.0});
  for (long i = 0; i < n; ++i) {
    const long src = i - delay;
    if (src >= 0 && src < n) out[i] = x[src];
  }
  return out;
}

void window_into(std::span<const cplx> x, std::size_t n, TapWindow w, std::span<cplx> out) noexcept {
  const long base = static_cast<long>(n) + static_cast<long>(w.post_taps);
  const long len = static_cast<long>(x.size());
  for (std::size_t l = 0; l < w.total(); ++l) {
    const long idx = base - static_cast<long>(l);
    out[l] = (idx >= 0 && idx < len) ? x[idx] : cplx{0.0, 0.0};
  }
}

std::vector<cplx> window_at(std::span<const cplx> x, std::size_t n, TapWindow w) {
  std::vector<cplx> out(w.total());
  window_into(x, n, w, out);
  return out;
}

double rms(std::span<const cplx> x) {
  if (x.empty()) throw ArgumentError("rms: empty input");
  double p = 0.0;
  for (const cplx& v : x) p += std::norm(v);
  return std::sqrt(p / static_cast<double>(x.size()));
}

double papr_db(std::span<const cplx> x) {
  if (x.empty()) throw ArgumentError("papr: empty input");
  double peak = 0.0, mean = 0.0;
  for (const cplx& v : x) {
    peak = std::max(peak, std::norm(v));
    mean += std::norm(v);
  }
  mean /= static_cast<double>(x.size());
  if (!(mean > 0.0)) throw ArgumentError("papr: zero-energy input");
  return 10.0 * std::log10(peak / mean);
}

double amplitude_quantile(std::span<const cplx> x, double q) {
  if (x.empty()) throw ArgumentError("amplitude_quantile: empty input");
  if (!(q > 0.0 && q <= 1.0)) throw ArgumentError("amplitude_quantile: q must lie in (0, 1]");
  std::vector<double> a(x.size());
  std::transform(x.begin(), x.end(), a.begin(), [](cplx v) { return std::abs(v); });
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(a.size())));
  const std::size_t k = std::clamp<std::size_t>(rank, 1, a.size()) - 1;
  std::nth_element(a.begin(), a.begin() + static_cast<long>(k), a.end());
  return a[k];
}

}  // namespace dpdlab

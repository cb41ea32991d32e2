#include "dpdlab/pa_sim.hpp"

#include <cmath>

#include "dpdlab/errors.hpp"
#include "dpdlab/rng.hpp"

namespace dpdlab {

void PaConfig::validate() const {
  if (k_pa == 0) throw ArgumentError("PaConfig: k_pa must be at least 1");
  if (coeffs.size() != (l_pa + 1) * k_pa) throw ArgumentError("PaConfig: coefficient array shape mismatch");
  if (coeffs[0] == cplx{0.0, 0.0}) throw ArgumentError("PaConfig: coeffs[0,0] must be nonzero");
  for (const cplx& c : coeffs) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw ArgumentError("PaConfig: non-finite coefficient");
  }
  if (!std::isfinite(drive_db)) throw ArgumentError("PaConfig: drive_db must be finite");
  if (smooth_limit && !(*smooth_limit > 0.0)) throw ArgumentError("PaConfig: a_sat must be positive");
  if (feedback_snr_db && !(*feedback_snr_db > 0.0)) throw ArgumentError("PaConfig: feedback_snr_db must be positive");
}

PaConfig make_pa_config(double rho, double sigma, std::size_t l_pa, std::size_t k_pa, double drive_db,
                        std::optional<double> smooth_limit, std::optional<double> feedback_snr_db) {
  PaConfig cfg;
  cfg.rho = rho;
  cfg.sigma = sigma;
  cfg.l_pa = l_pa;
  cfg.k_pa = k_pa;
  cfg.drive_db = drive_db;
  cfg.smooth_limit = smooth_limit;
  cfg.feedback_snr_db = feedback_snr_db;
  cfg.coeffs.assign((l_pa + 1) * k_pa, cplx{0.0, 0.0});
  for (std::size_t l = 0; l <= l_pa; ++l) {
    for (std::size_t k = 0; k < k_pa; ++k) {
      const double mag = std::pow(rho, static_cast<double>(l)) * std::pow(sigma, static_cast<double>(k));
      cfg.coeffs[l * k_pa + k] = mag * std::polar(1.0, 0.4 * static_cast<double>(l + 2 * k));
    }
  }
  if (k_pa > 0) cfg.coeffs[0] = cplx{1.0, 0.0};
  cfg.validate();
  return cfg;
}

PaConfig preset(DistortionLevel level) {
  const double drive = level == DistortionLevel::low ? -9.0 : -3.0;
  PaConfig cfg = make_pa_config(0.2, -0.12, 3, 4, drive, 1.0, 40.0);
  cfg.name = level == DistortionLevel::low ? "low" : "high";
  return cfg;
}

DistortionLevel parse_distortion_level(const std::string& text) {
  if (text == "low") return DistortionLevel::low;
  if (text == "high") return DistortionLevel::high;
  throw ArgumentError("unknown distortion level '" + text + "' (expected low or high)");
}

PaConfig linear_pa(cplx gain, double drive_db) {
  PaConfig cfg;
  cfg.rho = 0.0;
  cfg.sigma = 0.0;
  cfg.l_pa = 0;
  cfg.k_pa = 1;
  cfg.coeffs = {gain};
  cfg.drive_db = drive_db;
  cfg.smooth_limit.reset();
  cfg.feedback_snr_db.reset();
  cfg.name = "linear";
  cfg.validate();
  return cfg;
}

ComplexSequence pa_forward(const PaConfig& cfg, const ComplexSequence& x, std::optional<std::uint32_t> noise_seed) {
  cfg.validate();
  const std::size_t n = x.size();
  const double drive = std::pow(10.0, cfg.drive_db / 20.0);

  std::vector<cplx> u(n);
  std::vector<double> u_pow(n);  // |u|^2
  for (std::size_t i = 0; i < n; ++i) {
    cplx v = x[i] * drive;
    if (cfg.smooth_limit) {
      const double r = std::abs(v) / *cfg.smooth_limit;
      v /= std::pow(1.0 + std::pow(r, 6.0), 1.0 / 6.0);
    }
    u[i] = v;
    u_pow[i] = std::norm(v);
  }

  std::vector<cplx> y(n, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    cplx acc{0.0, 0.0};
    for (std::size_t l = 0; l <= cfg.l_pa && l <= i; ++l) {
      const cplx ul = u[i - l];
      const double a2 = u_pow[i - l];
      double p = 1.0;
      for (std::size_t k = 0; k < cfg.k_pa; ++k) {
        acc += cfg.coeff(l, k) * (ul * p);
        p *= a2;
      }
    }
    y[i] = acc;
  }

  if (cfg.feedback_snr_db && noise_seed) {
    double power = 0.0;
    for (const cplx& v : y) power += std::norm(v);
    power /= static_cast<double>(n);
    const double sd = std::sqrt(power * std::pow(10.0, -*cfg.feedback_snr_db / 10.0) / 2.0);
    RandomSource rng(*noise_seed);
    for (cplx& v : y) v += sd * rng.complex_normal();
  }
  return ComplexSequence(std::move(y), x.sample_rate_hint());
}

}  // namespace dpdlab

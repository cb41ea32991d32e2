#pragma once
// Ground-truth power amplifier: smooth limiter followed by a memory
// polynomial, with optional observation-receiver noise.

#include <optional>
#include <string>
#include <vector>

#include "dpdlab/signal.hpp"

namespace dpdlab {

enum class DistortionLevel { low, high };

struct PaConfig {
  // Generator parameters of the coefficient rule
  //   coeffs[l,k] = rho^l * sigma^k * exp(i*0.4*(l + 2k)),  coeffs[0,0] = 1.
  double rho = 0.2;
  double sigma = -0.12;
  std::size_t l_pa = 3;  // maximum delay
  std::size_t k_pa = 4;  // number of orders, k in [0, k_pa)
  std::vector<cplx> coeffs;  // (l_pa + 1) x k_pa, row-major by delay

  double drive_db = -9.0;
  std::optional<double> smooth_limit = 1.0;
  std::optional<double> feedback_snr_db = 40.0;
  std::string name = "custom";

  cplx coeff(std::size_t l, std::size_t k) const { return coeffs[l * k_pa + k]; }

  /// Throws ArgumentError on inconsistent shapes or non-physical values.
  void validate() const;
};

/// Builds a config from the closed-form coefficient rule.
PaConfig make_pa_config(double rho, double sigma, std::size_t l_pa, std::size_t k_pa, double drive_db,
                        std::optional<double> smooth_limit, std::optional<double> feedback_snr_db);

/// Frozen low/high distortion presets.
PaConfig preset(DistortionLevel level);
DistortionLevel parse_distortion_level(const std::string& text);

/// Single-coefficient linear amplifier y = g * 10^(drive/20) * x.
PaConfig linear_pa(cplx gain, double drive_db = 0.0);

/// y[n] = sum_{l,k} c[l,k] u[n-l] |u[n-l]|^{2k}, u = limiter(x * 10^(drive/20)).
/// Feedback noise is added only when both the config and `noise_seed` ask
/// for it.
ComplexSequence pa_forward(const PaConfig& cfg, const ComplexSequence& x,
                           std::optional<std::uint32_t> noise_seed = std::nullopt);

}  // namespace dpdlab

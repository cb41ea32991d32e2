#pragma once
// Attention-guided ensemble of amplitude-offset memory polynomials.
//
// For each output sample n with tap window v (T values, a_l = |v_l|):
//   expert m:     y_m = sum_{l,k} lambda[m,l,k] v_l rect(a_l + b_m)^(2k)
//   score m:      s_m = sum_l mu[m,l] max(0, a_l + b_m) + nu[m,l]
//   weights:      w = softmax(s)
//   output:       sum_m w_m y_m
// The offset b_m is shared between the expert basis and the attention score.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dpdlab/mpm.hpp"
#include "dpdlab/signal.hpp"

namespace dpdlab {

struct AgmpnnModel {
  TapWindow window;
  std::size_t k_orders = 1;
  std::size_t n_experts = 1;
  std::vector<cplx> lambda;     // ((m * T) + l) * K + k
  std::vector<double> offsets;  // b_m
  std::vector<double> mu;       // m * T + l
  std::vector<double> nu;       // m * T + l

  std::size_t taps() const noexcept { return window.total(); }
  std::size_t lambda_index(std::size_t m, std::size_t l, std::size_t k) const noexcept {
    return (m * taps() + l) * k_orders + k;
  }
  std::size_t gate_index(std::size_t m, std::size_t l) const noexcept { return m * taps() + l; }

  /// Real trainable parameters: 2*M*T*K + M + 2*M*T.
  std::size_t num_params() const noexcept;
  std::vector<double> flat_params() const;
  void set_flat_params(std::span<const double> flat);

  void validate() const;

  /// Expert m as a standalone AOMPM.
  MpmCoefficients expert(std::size_t m) const;
};

/// Gradients with the model's shapes. Complex coefficients store
/// (dL/dRe, dL/dIm) in the real and imaginary parts.
struct AgmpnnGradients {
  std::vector<cplx> lambda;
  std::vector<double> offsets;
  std::vector<double> mu;
  std::vector<double> nu;

  std::vector<double> flatten() const;
  static AgmpnnGradients unflatten(const AgmpnnModel& shape, std::span<const double> flat);
};

struct AgmpnnInitOptions {
  std::optional<MpmCoefficients> warm_start;
  std::uint32_t seed = 1;
  double a95 = 1.0;             // amplitude quantile setting the offset ladder
  double warm_noise = 1e-3;     // relative perturbation of warm-start coefficients
  double cold_lambda_std = 1e-2;
  double mu_std = 1e-2;
};

/// Fully random parameters for property and gradient checks: lambda ~
/// 0.5 CN(0, 1), b_m ~ -0.5 |N(0, 1)|, mu and nu ~ N(0, 1).
AgmpnnModel random_agmpnn(TapWindow window, std::size_t k_orders, std::size_t n_experts, std::uint32_t seed);

/// Offsets b_m = -(m / M) * a95, m = 0..M-1; coefficients from the warm
/// start (perturbed) or small seeded noise with a unit current-sample tap.
AgmpnnModel init_agmpnn(TapWindow window, std::size_t k_orders, std::size_t n_experts,
                        const AgmpnnInitOptions& options);

/// Every expert equal to `mpm` with a zero gate: the mixture reproduces the
/// MPM up to rounding.
AgmpnnModel agmpnn_from_mpm(const MpmCoefficients& mpm, std::size_t n_experts);

/// Softmax gate values for one tap window (T values).
std::vector<double> attention_weights(const AgmpnnModel& model, std::span<const cplx> taps);

ComplexSequence forward(const AgmpnnModel& model, const ComplexSequence& psi);
void forward_range(const AgmpnnModel& model, std::span<const cplx> psi, SampleRange range, std::span<cplx> out);

struct AgmpnnLoss {
  double loss = 0.0;  // mean |out - target|^2 over the range
  AgmpnnGradients grads;
};

/// Mean squared error over `range` and its exact gradient. The range must
/// skip the zero-filled edges: begin >= pre_taps, end <= size - post_taps.
AgmpnnLoss backward(const AgmpnnModel& model, std::span<const cplx> psi, std::span<const cplx> target,
                    SampleRange range);

/// Training primitive: adds scale * d(sum |e|^2)/d(theta) into `flat_grad`
/// (flat_params order) and returns sum |e|^2 over the range.
double accumulate_gradient(const AgmpnnModel& model, std::span<const cplx> psi, std::span<const cplx> target,
                           SampleRange range, double scale, std::span<double> flat_grad);

/// Complexity figure 4LKM + LM + 4L + 2M + 2 used for reporting.
std::size_t count_params_formula(std::size_t taps, std::size_t k_orders, std::size_t n_experts) noexcept;
/// Direct enumeration 2*M*T*K + M + 2*M*T.
std::size_t count_params_actual(std::size_t taps, std::size_t k_orders, std::size_t n_experts) noexcept;
std::size_t count_params_actual(const AgmpnnModel& model) noexcept;

}  // namespace dpdlab

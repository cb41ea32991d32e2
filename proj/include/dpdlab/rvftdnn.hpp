#pragma once
// Real-valued focused time-delay neural network baseline: interleaved I/Q of
// the tap window -> tanh(n1) -> tanh(n2) -> affine (Re, Im).

#include <cstdint>
#include <span>
#include <vector>

#include "dpdlab/signal.hpp"

namespace dpdlab {

struct RvftdnnModel {
  TapWindow window;
  std::size_t n1 = 1;
  std::size_t n2 = 1;
  std::vector<double> w1, b1;  // n1 x 2T (row-major), n1
  std::vector<double> w2, b2;  // n2 x n1, n2
  std::vector<double> w3, b3;  // 2 x n2, 2

  std::size_t inputs() const noexcept { return 2 * window.total(); }
  std::size_t num_params() const noexcept;
  std::vector<double> flat_params() const;
  void set_flat_params(std::span<const double> flat);
  void validate() const;
};

/// 2T*n1 + n1 + n1*n2 + n2 + 2*n2 + 2.
std::size_t rvftdnn_param_count(std::size_t taps, std::size_t n1, std::size_t n2) noexcept;

/// Gaussian weights with variance 1/fan_in, zero biases.
RvftdnnModel init_rvftdnn(TapWindow window, std::size_t n1, std::size_t n2, std::uint32_t seed);

/// init_rvftdnn with N(0, 0.1^2) biases, for gradient checks.
RvftdnnModel random_rvftdnn(TapWindow window, std::size_t n1, std::size_t n2, std::uint32_t seed);

ComplexSequence rvftdnn_forward(const RvftdnnModel& model, const ComplexSequence& psi);
void rvftdnn_forward_range(const RvftdnnModel& model, std::span<const cplx> psi, SampleRange range,
                           std::span<cplx> out);

struct RvftdnnLoss {
  double loss = 0.0;
  std::vector<double> grads;  // flat_params order
};

RvftdnnLoss rvftdnn_backward(const RvftdnnModel& model, std::span<const cplx> psi, std::span<const cplx> target,
                             SampleRange range);

/// Adds scale * d(sum |e|^2)/d(theta) into `flat_grad`; returns sum |e|^2.
double accumulate_gradient(const RvftdnnModel& model, std::span<const cplx> psi, std::span<const cplx> target,
                           SampleRange range, double scale, std::span<double> flat_grad);

}  // namespace dpdlab

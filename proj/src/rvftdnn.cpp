#include "dpdlab/rvftdnn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpdlab/errors.hpp"
#include "dpdlab/rng.hpp"
#include "dpdlab/simd/kernels.hpp"

namespace dpdlab {
namespace {

struct Activations {
  explicit Activations(const RvftdnnModel& m)
      : taps(m.window.total()), x(m.inputs()), h1(m.n1), h2(m.n2), d1(m.n1), d2(m.n2) {}
  std::vector<cplx> taps;
  std::vector<double> x, h1, h2;
  std::vector<double> d1, d2;  // backprop deltas
};

cplx evaluate(const RvftdnnModel& m, std::span<const cplx> psi, std::size_t n, Activations& a) noexcept {
  window_into(psi, n, m.window, a.taps);
  for (std::size_t l = 0; l < a.taps.size(); ++l) {
    a.x[2 * l] = a.taps[l].real();
    a.x[2 * l + 1] = a.taps[l].imag();
  }
  const std::size_t in = m.inputs();
  for (std::size_t i = 0; i < m.n1; ++i) {
    a.h1[i] = std::tanh(simd::dot({m.w1.data() + i * in, in}, a.x) + m.b1[i]);
  }
  for (std::size_t i = 0; i < m.n2; ++i) {
    a.h2[i] = std::tanh(simd::dot({m.w2.data() + i * m.n1, m.n1}, a.h1) + m.b2[i]);
  }
  const double re = simd::dot({m.w3.data(), m.n2}, a.h2) + m.b3[0];
  const double im = simd::dot({m.w3.data() + m.n2, m.n2}, a.h2) + m.b3[1];
  return {re, im};
}

template <typename F>
void for_each_array(RvftdnnModel& m, F&& f) {
  f(m.w1);
  f(m.b1);
  f(m.w2);
  f(m.b2);
  f(m.w3);
  f(m.b3);
}

}  // namespace

std::size_t rvftdnn_param_count(std::size_t taps, std::size_t n1, std::size_t n2) noexcept {
  return 2 * taps * n1 + n1 + n1 * n2 + n2 + 2 * n2 + 2;
}

std::size_t RvftdnnModel::num_params() const noexcept {
  return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
}

std::vector<double> RvftdnnModel::flat_params() const {
  std::vector<double> flat;
  flat.reserve(num_params());
  for (const auto* v : {&w1, &b1, &w2, &b2, &w3, &b3}) flat.insert(flat.end(), v->begin(), v->end());
  return flat;
}

void RvftdnnModel::set_flat_params(std::span<const double> flat) {
  if (flat.size() != num_params()) throw ArgumentError("RvftdnnModel: flat parameter vector has wrong length");
  std::size_t i = 0;
  for_each_array(*this, [&](std::vector<double>& v) {
    std::copy_n(flat.begin() + static_cast<long>(i), v.size(), v.begin());
    i += v.size();
  });
}

void RvftdnnModel::validate() const {
  if (n1 < 1 || n2 < 1) throw ArgumentError("RvftdnnModel: hidden widths must be positive");
  if (w1.size() != n1 * inputs() || b1.size() != n1 || w2.size() != n2 * n1 || b2.size() != n2 ||
      w3.size() != 2 * n2 || b3.size() != 2) {
    throw ArgumentError("RvftdnnModel: layer shapes are inconsistent");
  }
  for (double v : flat_params()) {
    if (!std::isfinite(v)) throw ArgumentError("RvftdnnModel: non-finite parameter");
  }
}

RvftdnnModel init_rvftdnn(TapWindow window, std::size_t n1, std::size_t n2, std::uint32_t seed) {
  if (n1 < 1 || n2 < 1) throw ArgumentError("init_rvftdnn: hidden widths must be positive");
  RvftdnnModel m;
  m.window = window;
  m.n1 = n1;
  m.n2 = n2;
  RandomSource rng(seed);
  auto fill = [&](std::vector<double>& w, std::size_t count, std::size_t fan_in) {
    w.resize(count);
    const double sd = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : w) v = sd * rng.normal();
  };
  fill(m.w1, n1 * m.inputs(), m.inputs());
  m.b1.assign(n1, 0.0);
  fill(m.w2, n2 * n1, n1);
  m.b2.assign(n2, 0.0);
  fill(m.w3, 2 * n2, n2);
  m.b3.assign(2, 0.0);
  return m;
}

RvftdnnModel random_rvftdnn(TapWindow window, std::size_t n1, std::size_t n2, std::uint32_t seed) {
  RvftdnnModel m = init_rvftdnn(window, n1, n2, seed);
  RandomSource rng(seed ^ 0x9e3779b9u);
  for (auto* b : {&m.b1, &m.b2, &m.b3}) {
    for (double& v : *b) v = 0.1 * rng.normal();
  }
  return m;
}

void rvftdnn_forward_range(const RvftdnnModel& model, std::span<const cplx> psi, SampleRange range,
                           std::span<cplx> out) {
  if (range.end > psi.size() || out.size() < range.size()) throw ArgumentError("rvftdnn_forward: bad range");
  Activations a(model);
  for (std::size_t n = range.begin; n < range.end; ++n) out[n - range.begin] = evaluate(model, psi, n, a);
}

ComplexSequence rvftdnn_forward(const RvftdnnModel& model, const ComplexSequence& psi) {
  model.validate();
  std::vector<cplx> out(psi.size());
  rvftdnn_forward_range(model, psi.samples(), SampleRange{0, psi.size()}, out);
  return ComplexSequence(std::move(out), psi.sample_rate_hint());
}

double accumulate_gradient(const RvftdnnModel& model, std::span<const cplx> psi, std::span<const cplx> target,
                           SampleRange range, double scale, std::span<double> flat_grad) {
  if (range.empty()) throw ArgumentError("rvftdnn: loss range is empty");
  if (target.size() != psi.size()) throw ArgumentError("rvftdnn: input and target lengths differ");
  if (range.begin < model.window.pre_taps || range.end + model.window.post_taps > psi.size()) {
    throw ArgumentError("rvftdnn: loss range touches the zero-filled edges");
  }
  if (flat_grad.size() != model.num_params()) throw ArgumentError("rvftdnn: gradient buffer size");

  const std::size_t in = model.inputs();
  const std::size_t n1 = model.n1, n2 = model.n2;
  double* gw1 = flat_grad.data();
  double* gb1 = gw1 + model.w1.size();
  double* gw2 = gb1 + n1;
  double* gb2 = gw2 + model.w2.size();
  double* gw3 = gb2 + n2;
  double* gb3 = gw3 + 2 * n2;

  Activations a(model);
  double sq_sum = 0.0;
  for (std::size_t n = range.begin; n < range.end; ++n) {
    const cplx out = evaluate(model, psi, n, a);
    const cplx e = out - target[n];
    sq_sum += std::norm(e);
    const double dre = 2.0 * scale * e.real();
    const double dim = 2.0 * scale * e.imag();

    gb3[0] += dre;
    gb3[1] += dim;
    simd::axpy(dre, std::span<const double>(a.h2), std::span<double>(gw3, n2));
    simd::axpy(dim, std::span<const double>(a.h2), std::span<double>(gw3 + n2, n2));

    for (std::size_t j = 0; j < n2; ++j) {
      const double back = dre * model.w3[j] + dim * model.w3[n2 + j];
      a.d2[j] = back * (1.0 - a.h2[j] * a.h2[j]);
    }
    std::fill(a.d1.begin(), a.d1.end(), 0.0);
    for (std::size_t j = 0; j < n2; ++j) {
      gb2[j] += a.d2[j];
      simd::axpy(a.d2[j], std::span<const double>(a.h1), std::span<double>(gw2 + j * n1, n1));
      simd::axpy(a.d2[j], std::span<const double>(model.w2.data() + j * n1, n1), std::span<double>(a.d1));
    }
    for (std::size_t i = 0; i < n1; ++i) {
      const double d = a.d1[i] * (1.0 - a.h1[i] * a.h1[i]);
      gb1[i] += d;
      simd::axpy(d, std::span<const double>(a.x), std::span<double>(gw1 + i * in, in));
    }
  }
  return sq_sum;
}

RvftdnnLoss rvftdnn_backward(const RvftdnnModel& model, std::span<const cplx> psi, std::span<const cplx> target,
                             SampleRange range) {
  model.validate();
  std::vector<double> grads(model.num_params(), 0.0);
  if (range.empty()) throw ArgumentError("rvftdnn: loss range is empty");
  const double n = static_cast<double>(range.size());
  const double sq = accumulate_gradient(model, psi, target, range, 1.0 / n, grads);
  return {sq / n, std::move(grads)};
}

}  // namespace dpdlab

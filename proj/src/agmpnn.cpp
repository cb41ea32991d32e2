#include "dpdlab/agmpnn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpdlab/errors.hpp"
#include "dpdlab/rng.hpp"
#include "dpdlab/simd/kernels.hpp"

namespace dpdlab {
namespace {

bool finite_all(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void check_loss_range(SampleRange range, std::size_t n, TapWindow w, std::size_t target_size) {
  if (range.empty()) throw ArgumentError("loss range is empty");
  if (target_size != n) throw ArgumentError("input and target lengths differ");
  if (range.begin < w.pre_taps || range.end + w.post_taps > n) {
    throw ArgumentError("loss range [" + std::to_string(range.begin) + ", " + std::to_string(range.end) +
                        ") touches the zero-filled edges of a length-" + std::to_string(n) + " sequence");
  }
}

// Per-sample scratch shared by forward and backward.
struct Workspace {
  explicit Workspace(const AgmpnnModel& model)
      : taps(model.taps()),
        amp(model.taps()),
        rows(model.n_experts * model.taps() * model.k_orders),
        expert_out(model.n_experts),
        scores(model.n_experts),
        weights(model.n_experts) {}

  std::vector<cplx> taps;
  std::vector<double> amp;
  std::vector<cplx> rows;  // basis rows, one block of T*K per expert
  std::vector<cplx> expert_out;
  std::vector<double> scores;
  std::vector<double> weights;
};

void softmax(std::span<const double> s, std::span<double> w) noexcept {
  const double peak = *std::max_element(s.begin(), s.end());
  double sum = 0.0;
  for (std::size_t m = 0; m < s.size(); ++m) {
    w[m] = std::exp(s[m] - peak);
    sum += w[m];
  }
  for (double& v : w) v /= sum;
}

void gate_scores(const AgmpnnModel& model, std::span<const double> amp, std::span<double> scores) noexcept {
  const std::size_t t = model.taps();
  for (std::size_t m = 0; m < model.n_experts; ++m) {
    const double b = model.offsets[m];
    double s = 0.0;
    for (std::size_t l = 0; l < t; ++l) {
      const std::size_t g = model.gate_index(m, l);
      s += model.mu[g] * std::max(0.0, amp[l] + b) + model.nu[g];
    }
    scores[m] = s;
  }
}

// Evaluates sample n into the workspace and returns the mixture output.
cplx evaluate_sample(const AgmpnnModel& model, std::span<const cplx> psi, std::size_t n, Workspace& ws) noexcept {
  const std::size_t tk = model.taps() * model.k_orders;
  window_into(psi, n, model.window, ws.taps);
  for (std::size_t l = 0; l < ws.taps.size(); ++l) ws.amp[l] = std::abs(ws.taps[l]);
  gate_scores(model, ws.amp, ws.scores);
  softmax(ws.scores, ws.weights);
  cplx out{0.0, 0.0};
  for (std::size_t m = 0; m < model.n_experts; ++m) {
    std::span<cplx> row(ws.rows.data() + m * tk, tk);
    basis_row(ws.taps, model.k_orders, model.offsets[m], row);
    ws.expert_out[m] = simd::dotu(row, std::span<const cplx>(model.lambda.data() + m * tk, tk));
    out += ws.weights[m] * ws.expert_out[m];
  }
  return out;
}

}  // namespace

std::size_t AgmpnnModel::num_params() const noexcept { return count_params_actual(*this); }

std::vector<double> AgmpnnModel::flat_params() const {
  std::vector<double> flat;
  flat.reserve(num_params());
  for (const cplx& v : lambda) {
    flat.push_back(v.real());
    flat.push_back(v.imag());
  }
  flat.insert(flat.end(), offsets.begin(), offsets.end());
  flat.insert(flat.end(), mu.begin(), mu.end());
  flat.insert(flat.end(), nu.begin(), nu.end());
  return flat;
}

void AgmpnnModel::set_flat_params(std::span<const double> flat) {
  if (flat.size() != num_params()) throw ArgumentError("AgmpnnModel: flat parameter vector has wrong length");
  std::size_t i = 0;
  for (cplx& v : lambda) {
    v = {flat[i], flat[i + 1]};
    i += 2;
  }
  for (double& v : offsets) v = flat[i++];
  for (double& v : mu) v = flat[i++];
  for (double& v : nu) v = flat[i++];
}

void AgmpnnModel::validate() const {
  if (k_orders < 1 || n_experts < 1) throw ArgumentError("AgmpnnModel: K and M must be at least 1");
  const std::size_t t = taps();
  if (lambda.size() != n_experts * t * k_orders || offsets.size() != n_experts || mu.size() != n_experts * t ||
      nu.size() != n_experts * t) {
    throw ArgumentError("AgmpnnModel: parameter array shapes do not match (T, K, M)");
  }
  if (!finite_all(flat_params())) throw ArgumentError("AgmpnnModel: non-finite parameter");
}

MpmCoefficients AgmpnnModel::expert(std::size_t m) const {
  const std::size_t tk = taps() * k_orders;
  MpmCoefficients c{MpmSpec{window, k_orders, offsets.at(m)}, {}};
  c.lambda.assign(lambda.begin() + static_cast<long>(m * tk), lambda.begin() + static_cast<long>((m + 1) * tk));
  return c;
}

std::vector<double> AgmpnnGradients::flatten() const {
  std::vector<double> flat;
  for (const cplx& v : lambda) {
    flat.push_back(v.real());
    flat.push_back(v.imag());
  }
  flat.insert(flat.end(), offsets.begin(), offsets.end());
  flat.insert(flat.end(), mu.begin(), mu.end());
  flat.insert(flat.end(), nu.begin(), nu.end());
  return flat;
}

AgmpnnGradients AgmpnnGradients::unflatten(const AgmpnnModel& shape, std::span<const double> flat) {
  AgmpnnModel tmp = shape;
  tmp.set_flat_params(flat);
  return {std::move(tmp.lambda), std::move(tmp.offsets), std::move(tmp.mu), std::move(tmp.nu)};
}

AgmpnnModel random_agmpnn(TapWindow window, std::size_t k_orders, std::size_t n_experts, std::uint32_t seed) {
  if (k_orders < 1 || n_experts < 1) throw ArgumentError("random_agmpnn: K and M must be at least 1");
  AgmpnnModel model;
  model.window = window;
  model.k_orders = k_orders;
  model.n_experts = n_experts;
  RandomSource rng(seed);
  model.lambda.resize(n_experts * window.total() * k_orders);
  for (cplx& v : model.lambda) v = 0.5 * rng.complex_normal();
  model.offsets.resize(n_experts);
  for (double& v : model.offsets) v = -0.5 * std::abs(rng.normal());
  model.mu.resize(n_experts * window.total());
  for (double& v : model.mu) v = rng.normal();
  model.nu.resize(n_experts * window.total());
  for (double& v : model.nu) v = rng.normal();
  return model;
}

AgmpnnModel init_agmpnn(TapWindow window, std::size_t k_orders, std::size_t n_experts,
                        const AgmpnnInitOptions& options) {
  if (k_orders < 1 || n_experts < 1) throw ArgumentError("init_agmpnn: K and M must be at least 1");
  if (!(options.a95 > 0.0)) throw ArgumentError("init_agmpnn: amplitude quantile must be positive");
  AgmpnnModel model;
  model.window = window;
  model.k_orders = k_orders;
  model.n_experts = n_experts;
  const std::size_t t = window.total();
  const std::size_t tk = t * k_orders;

  if (options.warm_start) {
    const MpmCoefficients& ws = *options.warm_start;
    ws.validate();
    if (ws.spec.window != window || ws.spec.k_orders != k_orders) {
      throw ArgumentError("init_agmpnn: warm start has a different tap window or order count");
    }
    if (ws.spec.offset_b != 0.0) throw ArgumentError("init_agmpnn: warm start must be a plain MPM (offset 0)");
  }

  RandomSource rng(options.seed);
  model.lambda.resize(n_experts * tk);
  for (std::size_t m = 0; m < n_experts; ++m) {
    for (std::size_t i = 0; i < tk; ++i) {
      const cplx g = rng.complex_normal();
      if (options.warm_start) {
        const cplx base = options.warm_start->lambda[i];
        model.lambda[m * tk + i] = base + options.warm_noise * std::abs(base) * g;
      } else {
        model.lambda[m * tk + i] = options.cold_lambda_std * g;
      }
    }
    if (!options.warm_start) model.lambda[model.lambda_index(m, window.post_taps, 0)] = cplx{1.0, 0.0};
  }

  model.offsets.resize(n_experts);
  for (std::size_t m = 0; m < n_experts; ++m) {
    model.offsets[m] = -static_cast<double>(m) / static_cast<double>(n_experts) * options.a95;
  }
  model.mu.resize(n_experts * t);
  for (double& v : model.mu) v = options.mu_std * rng.normal();
  model.nu.assign(n_experts * t, 0.0);
  return model;
}

AgmpnnModel agmpnn_from_mpm(const MpmCoefficients& mpm, std::size_t n_experts) {
  mpm.validate();
  if (n_experts < 1) throw ArgumentError("agmpnn_from_mpm: M must be at least 1");
  AgmpnnModel model;
  model.window = mpm.spec.window;
  model.k_orders = mpm.spec.k_orders;
  model.n_experts = n_experts;
  for (std::size_t m = 0; m < n_experts; ++m) model.lambda.insert(model.lambda.end(), mpm.lambda.begin(), mpm.lambda.end());
  model.offsets.assign(n_experts, mpm.spec.offset_b);
  model.mu.assign(n_experts * model.taps(), 0.0);
  model.nu.assign(n_experts * model.taps(), 0.0);
  return model;
}

std::vector<double> attention_weights(const AgmpnnModel& model, std::span<const cplx> taps) {
  if (taps.size() != model.taps()) throw ArgumentError("attention_weights: expected one value per tap");
  std::vector<double> amp(taps.size());
  for (std::size_t l = 0; l < taps.size(); ++l) amp[l] = std::abs(taps[l]);
  std::vector<double> scores(model.n_experts), w(model.n_experts);
  gate_scores(model, amp, scores);
  softmax(scores, w);
  return w;
}

void forward_range(const AgmpnnModel& model, std::span<const cplx> psi, SampleRange range, std::span<cplx> out) {
  if (range.end > psi.size() || out.size() < range.size()) throw ArgumentError("forward: bad range");
  Workspace ws(model);
  for (std::size_t n = range.begin; n < range.end; ++n) out[n - range.begin] = evaluate_sample(model, psi, n, ws);
}

ComplexSequence forward(const AgmpnnModel& model, const ComplexSequence& psi) {
  model.validate();
  std::vector<cplx> out(psi.size());
  forward_range(model, psi.samples(), SampleRange{0, psi.size()}, out);
  return ComplexSequence(std::move(out), psi.sample_rate_hint());
}

double accumulate_gradient(const AgmpnnModel& model, std::span<const cplx> psi, std::span<const cplx> target,
                           SampleRange range, double scale, std::span<double> flat_grad) {
  check_loss_range(range, psi.size(), model.window, target.size());
  if (flat_grad.size() != model.num_params()) throw ArgumentError("accumulate_gradient: gradient buffer size");

  const std::size_t t = model.taps();
  const std::size_t kk = model.k_orders;
  const std::size_t tk = t * kk;
  const std::size_t mm = model.n_experts;
  // Views into the flat gradient; lambda entries are interleaved (re, im).
  std::span<cplx> g_lambda(reinterpret_cast<cplx*>(flat_grad.data()), mm * tk);
  double* g_offsets = flat_grad.data() + 2 * mm * tk;
  double* g_mu = g_offsets + mm;
  double* g_nu = g_mu + mm * t;

  Workspace ws(model);
  std::vector<cplx> conj_row(tk);
  double sq_sum = 0.0;

  for (std::size_t n = range.begin; n < range.end; ++n) {
    const cplx out = evaluate_sample(model, psi, n, ws);
    const cplx e = out - target[n];
    sq_sum += std::norm(e);
    // dL/d(Re out) + i dL/d(Im out)
    const cplx g = 2.0 * scale * e;

    for (std::size_t m = 0; m < mm; ++m) {
      const double w = ws.weights[m];
      const double b = model.offsets[m];
      const cplx* row = ws.rows.data() + m * tk;
      const cplx* lam = model.lambda.data() + m * tk;

      // Coefficients: out is linear in lambda with factor w * row.
      for (std::size_t i = 0; i < tk; ++i) conj_row[i] = std::conj(row[i]);
      simd::axpy(w * g, std::span<const cplx>(conj_row), g_lambda.subspan(m * tk, tk));

      // Gate score: d out / d s_m = w_m (y_m - out).
      const double ds = (std::conj(g) * (w * (ws.expert_out[m] - out))).real();
      double db = 0.0;
      for (std::size_t l = 0; l < t; ++l) {
        const double r = ws.amp[l] + b;
        const std::size_t gi = model.gate_index(m, l);
        if (r > 0.0) {
          g_mu[gi] += ds * r;
          db += ds * model.mu[gi];
        }
        g_nu[gi] += ds;
      }

      // Offset through the expert basis: d/db rect(r)^(2k) = 2k r^(2k-1) for r > 0.
      if (kk > 1) {
        cplx dy{0.0, 0.0};
        for (std::size_t l = 0; l < t; ++l) {
          const double r = ws.amp[l] + b;
          if (!(r > 0.0)) continue;
          const double r2 = r * r;
          double p = r;  // r^(2k-1) for k = 1
          cplx q{0.0, 0.0};
          for (std::size_t k = 1; k < kk; ++k) {
            q += lam[l * kk + k] * (2.0 * static_cast<double>(k) * p);
            p *= r2;
          }
          dy += ws.taps[l] * q;
        }
        db += (std::conj(g) * (w * dy)).real();
      }
      g_offsets[m] += db;
    }
  }
  return sq_sum;
}

AgmpnnLoss backward(const AgmpnnModel& model, std::span<const cplx> psi, std::span<const cplx> target,
                    SampleRange range) {
  model.validate();
  check_loss_range(range, psi.size(), model.window, target.size());
  std::vector<double> flat(model.num_params(), 0.0);
  const double n = static_cast<double>(range.size());
  const double sq = accumulate_gradient(model, psi, target, range, 1.0 / n, flat);
  return {sq / n, AgmpnnGradients::unflatten(model, flat)};
}

std::size_t count_params_formula(std::size_t taps, std::size_t k_orders, std::size_t n_experts) noexcept {
  const std::size_t l = taps, k = k_orders, m = n_experts;
  return 4 * l * k * m + l * m + 4 * l + 2 * m + 2;
}

std::size_t count_params_actual(std::size_t taps, std::size_t k_orders, std::size_t n_experts) noexcept {
  return 2 * n_experts * taps * k_orders + n_experts + 2 * n_experts * taps;
}

std::size_t count_params_actual(const AgmpnnModel& model) noexcept {
  return count_params_actual(model.taps(), model.k_orders, model.n_experts);
}

}  // namespace dpdlab

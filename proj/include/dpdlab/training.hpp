#pragma once
// Adam, segment mini-batching with early stopping, and the central
// finite-difference gradient checker shared by the trainable models.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dpdlab/agmpnn.hpp"
#include "dpdlab/errors.hpp"
#include "dpdlab/mpm.hpp"
#include "dpdlab/rng.hpp"
#include "dpdlab/rvftdnn.hpp"
#include "dpdlab/signal.hpp"

namespace dpdlab {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 50;    // segments per optimizer step
  std::size_t segment_len = 1024; // samples per segment
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  double val_fraction = 0.2;
  std::uint32_t seed = 1;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 0 is the untrained starting point
  double train_loss = 0.0;
  double val_nmse_db = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;

  double best_val_nmse_db() const;
  /// `epoch,train_loss,val_nmse_db` with a header row.
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

struct AdamState {
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, const TrainConfig& cfg);

/// Patience-based stopping rule over a validation curve (lower is better).
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Records the value for `epoch`; returns true once `patience` epochs have
  /// passed without improving on the best value.
  bool observe(std::size_t epoch, double value);

  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_value() const noexcept { return best_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct SegmentSplit {
  std::vector<SampleRange> train;
  std::vector<SampleRange> val;
};

/// Contiguous segments of `segment_len` samples over the usable range
/// [pre_taps, n - post_taps); the trailing `val_fraction` of segments (at
/// least one) is held out for validation.
SegmentSplit make_segments(std::size_t n_samples, TapWindow window, std::size_t segment_len, double val_fraction);

struct Dataset {
  std::span<const cplx> input;   // compensator input (normalized PA output)
  std::span<const cplx> target;  // what the compensator should reproduce
  std::vector<SampleRange> train;
  std::vector<SampleRange> val;
};

inline void predict_range(const AgmpnnModel& m, std::span<const cplx> psi, SampleRange r, std::span<cplx> out) {
  forward_range(m, psi, r, out);
}
inline void predict_range(const RvftdnnModel& m, std::span<const cplx> psi, SampleRange r, std::span<cplx> out) {
  rvftdnn_forward_range(m, psi, r, out);
}
inline void predict_range(const MpmCoefficients& m, std::span<const cplx> psi, SampleRange r, std::span<cplx> out) {
  mpm_predict_range(m, psi, r, out);
}

template <typename M>
concept Trainable = requires(M model, const M& cm, std::span<const double> flat, std::span<double> grad,
                             std::span<const cplx> x, SampleRange r, std::span<cplx> out) {
  { cm.num_params() } -> std::convertible_to<std::size_t>;
  { cm.flat_params() } -> std::same_as<std::vector<double>>;
  model.set_flat_params(flat);
  { accumulate_gradient(cm, x, x, r, 1.0, grad) } -> std::convertible_to<double>;
  predict_range(cm, x, r, out);
};

/// Predictions over `ranges`, concatenated.
template <typename M>
std::vector<cplx> predict_ranges(const M& model, std::span<const cplx> input, std::span<const SampleRange> ranges) {
  std::size_t total = 0;
  for (const SampleRange& r : ranges) total += r.size();
  std::vector<cplx> out(total);
  std::size_t at = 0;
  for (const SampleRange& r : ranges) {
    predict_range(model, input, r, std::span<cplx>(out).subspan(at, r.size()));
    at += r.size();
  }
  return out;
}

/// NMSE (dB) of the model's predictions against the targets over `ranges`.
template <typename M>
double ranges_nmse_db(const M& model, std::span<const cplx> input, std::span<const cplx> target,
                      std::span<const SampleRange> ranges) {
  return nmse_db(predict_ranges(model, input, ranges), gather(target, ranges));
}

/// Mean |prediction - target|^2 over `ranges`.
template <typename M>
double ranges_mse(const M& model, std::span<const cplx> input, std::span<const cplx> target,
                  std::span<const SampleRange> ranges) {
  const auto pred = predict_ranges(model, input, ranges);
  const auto ref = gather(target, ranges);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::norm(pred[i] - ref[i]);
  return s / static_cast<double>(pred.size());
}

/// Mini-batch Adam over shuffled training segments. Epoch 0 records the
/// starting point; the parameters of the best validation epoch are restored
/// on return.
template <Trainable M>
TrainHistory train(M& model, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.train.empty() || data.val.empty()) throw ArgumentError("train: need at least one training and one validation segment");
  if (data.input.size() != data.target.size()) throw ArgumentError("train: input and target lengths differ");

  TrainHistory history;
  EarlyStopping stopper(cfg.patience);
  std::vector<double> params = model.flat_params();
  std::vector<double> best_params = params;
  std::vector<double> grad(params.size());
  AdamState adam(params.size());
  RandomSource rng(cfg.seed);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const double initial_val = ranges_nmse_db(model, data.input, data.target, data.val);
  history.epochs.push_back({0, ranges_mse(model, data.input, data.target, data.train), initial_val});
  stopper.observe(0, initial_val);

  std::size_t epoch = 1;
  for (; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double epoch_sq = 0.0;
    std::size_t epoch_samples = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::size_t batch_samples = 0;
      for (std::size_t i = start; i < stop; ++i) batch_samples += data.train[order[i]].size();
      std::fill(grad.begin(), grad.end(), 0.0);
      const double scale = 1.0 / static_cast<double>(batch_samples);
      double batch_sq = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        batch_sq += accumulate_gradient(model, data.input, data.target, data.train[order[i]], scale, grad);
      }
      if (!std::isfinite(batch_sq)) {
        throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch));
      }
      epoch_sq += batch_sq;
      epoch_samples += batch_samples;
      adam_step(adam, params, grad, cfg);
      model.set_flat_params(params);
    }

    const double val = ranges_nmse_db(model, data.input, data.target, data.val);
    if (!std::isfinite(val)) throw TrainingError("train: non-finite validation NMSE at epoch " + std::to_string(epoch));
    history.epochs.push_back({epoch, epoch_sq / static_cast<double>(epoch_samples), val});
    const std::size_t previous_best = stopper.best_epoch();
    const bool stop = stopper.observe(epoch, val);
    if (stopper.best_epoch() != previous_best) best_params = params;
    if (stop) break;
  }
  history.stopped_epoch = std::min(epoch, cfg.max_epochs);
  history.best_epoch = stopper.best_epoch();
  model.set_flat_params(best_params);
  return history;
}

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t n_params = 0;
};

inline constexpr double kGradCheckFloor = 1e-7;

/// Central differences on every real parameter of the mean squared error
/// over `range` versus the analytic gradient. Relative error per parameter
/// is |a - n| / max(|a|, |n|, 1e-7).
template <Trainable M>
GradCheckResult finite_diff_check(const M& model, std::span<const cplx> input, std::span<const cplx> target,
                                  SampleRange range, double h = 1e-6) {
  if (range.empty()) throw ArgumentError("finite_diff_check: empty loss range");
  const std::size_t n = model.num_params();
  if (n > 1000) throw ArgumentError("finite_diff_check: model too large (more than 1000 parameters)");

  std::vector<double> analytic(n, 0.0);
  accumulate_gradient(model, input, target, range, 1.0 / static_cast<double>(range.size()), analytic);

  const std::vector<SampleRange> ranges{range};
  M probe = model;
  std::vector<double> params = model.flat_params();
  GradCheckResult result;
  result.n_params = n;
  for (std::size_t i = 0; i < n; ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    probe.set_flat_params(params);
    const double up = ranges_mse(probe, input, target, ranges);
    params[i] = saved - h;
    probe.set_flat_params(params);
    const double down = ranges_mse(probe, input, target, ranges);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), kGradCheckFloor});
    const double err = std::abs(analytic[i] - numeric) / denom;
    if (err > result.max_relative_error || i == 0) {
      result = {err, i, analytic[i], numeric, n};
    }
  }
  return result;
}

}  // namespace dpdlab

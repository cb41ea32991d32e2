#include "dpdlab/training.hpp"

#include <fstream>
#include <sstream>

namespace dpdlab {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ArgumentError("TrainConfig: learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ArgumentError("TrainConfig: beta1 and beta2 must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw ArgumentError("TrainConfig: epsilon must be positive");
  if (batch_size == 0 || segment_len == 0 || max_epochs == 0 || patience == 0) {
    throw ArgumentError("TrainConfig: batch_size, segment_len, max_epochs and patience must be positive");
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ArgumentError("TrainConfig: val_fraction must lie in (0, 1)");
}

double TrainHistory::best_val_nmse_db() const {
  for (const EpochRecord& r : epochs) {
    if (r.epoch == best_epoch) return r.val_nmse_db;
  }
  throw ArgumentError("TrainHistory: best epoch not recorded");
}

std::string TrainHistory::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,train_loss,val_nmse_db\n";
  for (const EpochRecord& r : epochs) os << r.epoch << ',' << r.train_loss << ',' << r.val_nmse_db << '\n';
  return os.str();
}

void TrainHistory::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << to_csv();
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, const TrainConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ArgumentError("adam_step: parameter, gradient and state sizes differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

bool EarlyStopping::observe(std::size_t epoch, double value) {
  if (value < best_) {
    best_ = value;
    best_epoch_ = epoch;
    return false;
  }
  return epoch - best_epoch_ >= patience_;
}

SegmentSplit make_segments(std::size_t n_samples, TapWindow window, std::size_t segment_len, double val_fraction) {
  if (segment_len == 0) throw ArgumentError("make_segments: segment length must be positive");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ArgumentError("make_segments: val_fraction must lie in (0, 1)");
  const std::size_t begin = window.pre_taps;
  const std::size_t end = n_samples > window.post_taps ? n_samples - window.post_taps : 0;
  std::vector<SampleRange> segments;
  for (std::size_t s = begin; s + segment_len <= end; s += segment_len) segments.push_back({s, s + segment_len});
  if (segments.size() < 2) throw ArgumentError("make_segments: fewer than two segments fit in the sequence");
  auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(segments.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, segments.size() - 1);
  SegmentSplit split;
  split.train.assign(segments.begin(), segments.end() - static_cast<long>(n_val));
  split.val.assign(segments.end() - static_cast<long>(n_val), segments.end());
  return split;
}

}  // namespace dpdlab

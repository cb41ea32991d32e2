#include <gtest/gtest.h>

#include <cmath>

#include "dpdlab/errors.hpp"
#include "dpdlab/ila.hpp"
#include "dpdlab/training.hpp"
#include "test_util.hpp"

using namespace dpdlab;

TEST(TrainConfig, DefaultsAndValidation) {
  const TrainConfig cfg;
  EXPECT_EQ(cfg.learning_rate, 1e-3);
  EXPECT_EQ(cfg.beta1, 0.9);
  EXPECT_EQ(cfg.beta2, 0.999);
  EXPECT_EQ(cfg.epsilon, 1e-8);
  EXPECT_EQ(cfg.batch_size, 50u);
  EXPECT_EQ(cfg.segment_len, 1024u);
  EXPECT_EQ(cfg.max_epochs, 100u);
  EXPECT_EQ(cfg.patience, 5u);
  EXPECT_NO_THROW(cfg.validate());
  for (auto mutate : std::vector<void (*)(TrainConfig&)>{
           [](TrainConfig& c) { c.learning_rate = 0.0; }, [](TrainConfig& c) { c.beta1 = 1.0; },
           [](TrainConfig& c) { c.beta2 = 0.0; }, [](TrainConfig& c) { c.epsilon = -1.0; },
           [](TrainConfig& c) { c.batch_size = 0; }, [](TrainConfig& c) { c.segment_len = 0; },
           [](TrainConfig& c) { c.max_epochs = 0; }, [](TrainConfig& c) { c.patience = 0; },
           [](TrainConfig& c) { c.val_fraction = 1.0; }}) {
    TrainConfig bad;
    mutate(bad);
    EXPECT_THROW(bad.validate(), ArgumentError);
  }
}

TEST(Adam, ZeroGradientFromRestIsNoOp) {
  TrainConfig cfg;
  AdamState st(3);
  std::vector<double> p{1.0, -2.0, 3.0};
  adam_step(st, p, std::vector<double>(3, 0.0), cfg);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0, 3.0}));
  EXPECT_EQ(st.step, 1u);
}

TEST(Adam, ZeroGradientDecaysMoments) {
  TrainConfig cfg;
  AdamState st(1);
  st.m = {0.5};
  st.v = {0.25};
  st.step = 3;
  std::vector<double> p{0.0};
  adam_step(st, p, std::vector<double>{0.0}, cfg);
  EXPECT_DOUBLE_EQ(st.m[0], 0.45);
  EXPECT_DOUBLE_EQ(st.v[0], 0.25 * 0.999);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  TrainConfig cfg;
  for (double g : {1e-3, 0.5, -7.0}) {
    AdamState st(1);
    std::vector<double> p{2.0};
    adam_step(st, p, std::vector<double>{g}, cfg);
    const double expected = 2.0 - cfg.learning_rate * g / (std::abs(g) + cfg.epsilon);
    EXPECT_NEAR(p[0], expected, 1e-15);
    EXPECT_NEAR(std::abs(p[0] - 2.0), cfg.learning_rate, 1e-7);
  }
}

TEST(Adam, TwoStepsMatchHandTrace) {
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  const double g = 0.3, b1 = cfg.beta1, b2 = cfg.beta2, eps = cfg.epsilon, lr = cfg.learning_rate;
  // Hand-rolled reference.
  double x = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    x -= lr * mh / (std::sqrt(vh) + eps);
  }
  AdamState st(1);
  std::vector<double> p{1.0};
  adam_step(st, p, std::vector<double>{g}, cfg);
  adam_step(st, p, std::vector<double>{g}, cfg);
  EXPECT_NEAR(p[0], x, 1e-12);
}

TEST(Adam, ShapeMismatch) {
  AdamState st(2);
  std::vector<double> p(2);
  EXPECT_THROW(adam_step(st, p, std::vector<double>(3), TrainConfig{}), ArgumentError);
  std::vector<double> p3(3);
  EXPECT_THROW(adam_step(st, p3, std::vector<double>(3), TrainConfig{}), ArgumentError);
}

TEST(EarlyStopping, StopsPatienceEpochsAfterBest) {
  const std::size_t patience = 3;
  EarlyStopping es(patience);
  const std::vector<double> curve{-1, -2, -3, -4, -5, -4.9, -4.8, -4.7, -4.6, -4.5};
  std::size_t stopped = 0;
  for (std::size_t e = 0; e < curve.size(); ++e) {
    if (es.observe(e, curve[e])) {
      stopped = e;
      break;
    }
  }
  EXPECT_EQ(es.best_epoch(), 4u);
  EXPECT_EQ(stopped, es.best_epoch() + patience);
}

TEST(Segments, SplitIsContiguousTail) {
  const auto s = make_segments(10000, TapWindow{3, 0}, 1000, 0.2);
  ASSERT_EQ(s.train.size() + s.val.size(), 9u);
  EXPECT_EQ(s.val.size(), 2u);
  EXPECT_EQ(s.train.front().begin, 3u);
  for (std::size_t i = 1; i < s.train.size(); ++i) EXPECT_EQ(s.train[i].begin, s.train[i - 1].end);
  EXPECT_EQ(s.val.front().begin, s.train.back().end);
  EXPECT_LE(s.val.back().end, 10000u);
}

TEST(Segments, Errors) {
  EXPECT_THROW(make_segments(1500, TapWindow{0, 0}, 1000, 0.2), ArgumentError);
  EXPECT_THROW(make_segments(5000, TapWindow{0, 0}, 0, 0.2), ArgumentError);
  EXPECT_THROW(make_segments(5000, TapWindow{0, 0}, 100, 0.0), ArgumentError);
}

namespace {

struct MpmData {
  ComplexSequence psi = generate_waveform(41, 8192, 0.25);
  MpmCoefficients truth{MpmSpec{TapWindow{1, 0}, 2, 0.0}, {{0.9, 0.1}, {-0.2, 0.05}, {0.1, -0.05}, {0.02, 0.01}}};
  ComplexSequence phi = mpm_predict(truth, psi);
};

TrainConfig fast_cfg() {
  TrainConfig cfg;
  cfg.segment_len = 64;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-2;
  cfg.patience = 20;
  return cfg;
}

}  // namespace

TEST(Train, AtTruthParametersStayPut) {
  const MpmData d;
  const TrainConfig cfg = fast_cfg();
  const SegmentSplit split = make_segments(d.psi.size(), d.truth.spec.window, cfg.segment_len, cfg.val_fraction);
  const Dataset data{d.psi.samples(), d.phi.samples(), split.train, split.val};
  AgmpnnInitOptions opt;
  opt.warm_start = d.truth;
  opt.warm_noise = 0.0;
  AgmpnnModel m = init_agmpnn(d.truth.spec.window, 2, 1, opt);
  const auto before = m.flat_params();
  train(m, data, cfg);
  const auto after = m.flat_params();
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NEAR(after[i], before[i], 1e-9) << i;
}

TEST(Train, LearnsMpmFromRandomInit) {
  const MpmData d;
  // LS oracle: the floor is exact on noiseless data.
  const SampleRange all{1, d.psi.size()};
  const auto ls = ls_fit(build_basis(d.psi.samples(), d.truth.spec, all), gather(d.phi.samples(), {&all, 1}), 0.0);
  EXPECT_LT(ranges_nmse_db(ls, d.psi.samples(), d.phi.samples(), std::vector<SampleRange>{all}), -120.0);

  const TrainConfig cfg = fast_cfg();
  const SegmentSplit split = make_segments(d.psi.size(), d.truth.spec.window, cfg.segment_len, cfg.val_fraction);
  const Dataset data{d.psi.samples(), d.phi.samples(), split.train, split.val};
  AgmpnnInitOptions opt;
  opt.seed = 3;
  AgmpnnModel m = init_agmpnn(d.truth.spec.window, 2, 1, opt);
  const TrainHistory h = train(m, data, cfg);
  EXPECT_LT(h.best_val_nmse_db(), -60.0);
}

TEST(Train, ReproducibleAndRestoresBest) {
  const auto chi = generate_waveform(5, 8192, 0.25);
  const auto pd = prepare_postinverse(preset(DistortionLevel::high), chi, IlaOptions{}, 7);
  TrainConfig cfg = fast_cfg();
  cfg.learning_rate = 5e-3;
  cfg.max_epochs = 15;
  cfg.patience = 3;
  const TapWindow w{2, 0};
  const SegmentSplit split = make_segments(pd.input.size(), w, cfg.segment_len, cfg.val_fraction);
  const Dataset data{pd.input, pd.target, split.train, split.val};

  RvftdnnModel a = init_rvftdnn(w, 6, 5, 9), b = init_rvftdnn(w, 6, 5, 9);
  const TrainHistory ha = train(a, data, cfg), hb = train(b, data, cfg);
  EXPECT_EQ(ha.to_csv(), hb.to_csv());
  EXPECT_EQ(a.flat_params(), b.flat_params());

  double best = ha.epochs.front().val_nmse_db;
  std::size_t best_epoch = 0;
  for (const auto& e : ha.epochs) {
    if (e.val_nmse_db < best) best = e.val_nmse_db, best_epoch = e.epoch;
  }
  EXPECT_EQ(ha.best_epoch, best_epoch);
  EXPECT_NEAR(ranges_nmse_db(a, data.input, data.target, data.val), best, 1e-12);
  EXPECT_LE(ha.stopped_epoch, cfg.max_epochs);
}

TEST(Train, WarmStartNeverEndsWorse) {
  const auto chi = generate_waveform(6, 16384, 0.25);
  const auto pd = prepare_postinverse(preset(DistortionLevel::high), chi, IlaOptions{}, 8);
  TrainConfig cfg = fast_cfg();
  cfg.learning_rate = 1e-3;
  cfg.max_epochs = 5;
  ModelSpec spec;
  spec.family = ModelFamily::agmpnn;
  spec.window = TapWindow{3, 0};
  spec.k_orders = 3;
  spec.m_experts = 3;
  const IlaFit f = fit_postinverse(pd.input, pd.target, spec, cfg);
  ASSERT_TRUE(f.history.has_value());
  EXPECT_LE(f.history->best_val_nmse_db(), f.history->epochs.front().val_nmse_db + 0.01);
  EXPECT_NEAR(f.report.postinverse_nmse_db, f.history->best_val_nmse_db(), 1e-12);
}

TEST(Train, EmptySplitsRejected) {
  const auto x = testutil::random_samples(1, 100);
  RvftdnnModel m = init_rvftdnn(TapWindow{0, 0}, 2, 2, 1);
  const Dataset no_val{x, x, {SampleRange{0, 50}}, {}};
  EXPECT_THROW(train(m, no_val, TrainConfig{}), ArgumentError);
  const Dataset no_train{x, x, {}, {SampleRange{0, 50}}};
  EXPECT_THROW(train(m, no_train, TrainConfig{}), ArgumentError);
}

TEST(Train, ConvergenceEnvelopeWithDefaults) {
  const auto chi = generate_waveform(12, 65536, 0.25);
  const auto pd = prepare_postinverse(preset(DistortionLevel::low), chi, IlaOptions{}, 13);
  const TrainConfig cfg;
  const TapWindow w{3, 0};
  const SegmentSplit split = make_segments(pd.input.size(), w, cfg.segment_len, cfg.val_fraction);
  const Dataset data{pd.input, pd.target, split.train, split.val};
  RvftdnnModel m = init_rvftdnn(w, 10, 10, 1);
  const TrainHistory h = train(m, data, cfg);
  EXPECT_GE(h.stopped_epoch, 10u);
  EXPECT_LE(h.stopped_epoch, cfg.max_epochs);
}

TEST(TrainHistory, CsvHeader) {
  TrainHistory h;
  h.epochs = {{0, 1.5, -3.0}, {1, 0.5, -6.0}};
  h.best_epoch = 1;
  const std::string csv = h.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,train_loss,val_nmse_db");
  EXPECT_DOUBLE_EQ(h.best_val_nmse_db(), -6.0);
}

TEST(GradCheck, Preconditions) {
  const RvftdnnModel m = init_rvftdnn(TapWindow{2, 0}, 4, 3, 1);
  const auto x = testutil::random_samples(1, 32);
  EXPECT_THROW(finite_diff_check(m, x, x, SampleRange{5, 5}), ArgumentError);
  const RvftdnnModel big = init_rvftdnn(TapWindow{9, 0}, 30, 30, 1);
  EXPECT_THROW(finite_diff_check(big, x, x, SampleRange{9, 20}), ArgumentError);
}

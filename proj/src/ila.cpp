#include "dpdlab/ila.hpp"

#include <string>

#include "dpdlab/errors.hpp"

namespace dpdlab {

std::string_view family_name(ModelFamily family) noexcept {
  switch (family) {
    case ModelFamily::mpm:
      return "mpm";
    case ModelFamily::agmpnn:
      return "agmpnn";
    case ModelFamily::rvftdnn:
      return "rvftdnn";
  }
  return "unknown";
}

ModelFamily parse_family(std::string_view text) {
  if (text == "mpm") return ModelFamily::mpm;
  if (text == "agmpnn") return ModelFamily::agmpnn;
  if (text == "rvftdnn") return ModelFamily::rvftdnn;
  throw ArgumentError("unknown model family '" + std::string(text) + "' (expected mpm, agmpnn or rvftdnn)");
}

ModelFamily family_of(const DpdModel& model) noexcept {
  return static_cast<ModelFamily>(model.index());
}

TapWindow window_of(const DpdModel& model) noexcept {
  return std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, MpmCoefficients>) {
          return m.spec.window;
        } else {
          return m.window;
        }
      },
      model);
}

ComplexSequence apply_dpd(const DpdModel& model, const ComplexSequence& x) {
  std::vector<cplx> out(x.size());
  std::visit([&](const auto& m) { predict_range(m, x.samples(), SampleRange{0, x.size()}, out); }, model);
  return ComplexSequence(std::move(out), x.sample_rate_hint());
}

std::size_t params_actual(const DpdModel& model) noexcept {
  return std::visit([](const auto& m) { return static_cast<std::size_t>(m.num_params()); }, model);
}

std::size_t params_formula(const DpdModel& model) noexcept {
  if (const auto* a = std::get_if<AgmpnnModel>(&model)) {
    return count_params_formula(a->taps(), a->k_orders, a->n_experts);
  }
  return params_actual(model);
}

SampleRange usable_range(std::size_t n, TapWindow window) {
  if (n < window.total()) throw ArgumentError("usable_range: sequence shorter than the tap window");
  return {window.pre_taps, n - window.post_taps};
}

MpmCoefficients identity_dpd() { return MpmCoefficients{MpmSpec{TapWindow{0, 0}, 1, 0.0}, {cplx{1.0, 0.0}}}; }

PostinverseData prepare_postinverse(const PaConfig& pa, const ComplexSequence& phi, const IlaOptions& options,
                                    std::uint32_t noise_seed) {
  const auto noise = options.feedback_noise ? std::optional<std::uint32_t>(noise_seed) : std::nullopt;
  const ComplexSequence psi = pa_forward(pa, phi, noise);
  const AlignmentResult al = align(phi, psi, options.max_lag);
  std::vector<cplx> aligned = shift(psi.samples(), -al.delay);
  for (cplx& v : aligned) v /= al.gain;
  return {std::move(aligned), phi.to_vector(), al.gain, al.delay};
}

namespace {

void fill_shape(IlaReport& r, const DpdModel& model) {
  r.family = family_of(model);
  r.taps = window_of(model).total();
  r.params_actual = params_actual(model);
  r.params_formula = params_formula(model);
  if (const auto* m = std::get_if<MpmCoefficients>(&model)) {
    r.k_orders = m->spec.k_orders;
    r.m_experts = 0;
  } else if (const auto* a = std::get_if<AgmpnnModel>(&model)) {
    r.k_orders = a->k_orders;
    r.m_experts = a->n_experts;
  } else {
    r.k_orders = 0;
    r.m_experts = 0;
  }
}

struct Linearization {
  double nmse_db = 0.0;
  cplx gain{1.0, 0.0};
};

// NMSE of the PA output against C * chi after predistortion by `model`. The
// zero-filled start-up and tail of the compensator and PA memory are skipped;
// `guard_window` sets the compensator part of that guard.
Linearization linearization(const PaConfig& pa, const DpdModel& model, const ComplexSequence& chi,
                            std::optional<std::uint32_t> noise_seed, std::optional<TapWindow> guard_window = {}) {
  const std::size_t guard = guard_window.value_or(window_of(model)).total() + pa.l_pa;
  const std::size_t n = chi.size();
  if (n <= 2 * guard) throw ArgumentError("linearization: waveform too short for the evaluation guard");
  const ComplexSequence psi = pa_forward(pa, apply_dpd(model, chi), noise_seed);
  const auto ref = chi.samples().subspan(guard, n - 2 * guard);
  const auto out = psi.samples().subspan(guard, n - 2 * guard);
  Linearization lin;
  lin.gain = ls_gain(ref, out);
  std::vector<cplx> scaled(ref.begin(), ref.end());
  for (cplx& v : scaled) v *= lin.gain;
  lin.nmse_db = nmse_db(out, scaled);
  return lin;
}

MpmCoefficients fit_mpm(const Dataset& data, const MpmSpec& spec, std::optional<double> ridge) {
  const BasisMatrix basis = build_basis(data.input, spec, data.train);
  return ls_fit(basis, gather(data.target, data.train), ridge);
}

}  // namespace

IlaFit fit_postinverse(std::span<const cplx> input, std::span<const cplx> target, const ModelSpec& spec,
                       const TrainConfig& cfg) {
  if (input.size() != target.size()) throw ArgumentError("fit_postinverse: input and target lengths differ");
  const SegmentSplit split = make_segments(input.size(), spec.window, cfg.segment_len, cfg.val_fraction);
  const Dataset data{input, target, split.train, split.val};

  IlaFit fit{identity_dpd(), {}, std::nullopt, std::nullopt, std::nullopt};
  switch (spec.family) {
    case ModelFamily::mpm: {
      fit.model = fit_mpm(data, MpmSpec{spec.window, spec.k_orders, 0.0}, spec.ridge);
      break;
    }
    case ModelFamily::agmpnn: {
      AgmpnnInitOptions init;
      init.seed = spec.model_seed;
      init.a95 = amplitude_quantile(input, 0.95);
      if (spec.warm_start) {
        MpmCoefficients ws = fit_mpm(data, MpmSpec{spec.window, spec.k_orders, 0.0}, spec.ridge);
        fit.report.warm_start_postinverse_nmse_db = ranges_nmse_db(ws, data.input, data.target, data.val);
        init.warm_start = ws;
        fit.warm_start = std::move(ws);
      }
      AgmpnnModel model = init_agmpnn(spec.window, spec.k_orders, spec.m_experts, init);
      fit.history = train(model, data, cfg);
      fit.model = std::move(model);
      break;
    }
    case ModelFamily::rvftdnn: {
      RvftdnnModel model = init_rvftdnn(spec.window, spec.n1, spec.n2, spec.model_seed);
      fit.history = train(model, data, cfg);
      fit.model = std::move(model);
      break;
    }
  }
  fit.report.postinverse_nmse_db =
      std::visit([&](const auto& m) { return ranges_nmse_db(m, data.input, data.target, data.val); }, fit.model);
  return fit;
}

namespace {

template <typename FitFn>
IlaFit run_ila(const PaConfig& pa, const ComplexSequence& chi, const IlaOptions& options, FitFn&& fit_fn) {
  if (options.iterations < 1) throw ArgumentError("ila: at least one iteration is required");
  ComplexSequence phi = chi;
  IlaFit fit;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    if (it > 0) phi = apply_dpd(fit.model, chi);
    const PostinverseData pd = prepare_postinverse(pa, phi, options, options.noise_seed + static_cast<std::uint32_t>(it));
    fit = fit_fn(pd);
    fit.report.gain_fit = pd.gain;
    fit.report.fit_delay = pd.delay;
  }
  fill_shape(fit.report, fit.model);
  fit.report.preset = pa.name;
  fit.report.seeds.noise = options.noise_seed;
  return fit;
}

}  // namespace

IlaFit ila_fit(const PaConfig& pa, const ComplexSequence& chi, const ModelSpec& spec, const TrainConfig& train_cfg,
               const IlaOptions& options) {
  IlaFit fit = run_ila(pa, chi, options, [&](const PostinverseData& pd) { return fit_postinverse(pd.input, pd.target, spec, train_cfg); });
  fit.report.seeds.model = spec.model_seed;
  if (options.deploy_select && spec.family == ModelFamily::agmpnn && fit.warm_start) {
    const double trained = feedback_linearization_db(pa, fit.model, chi, options);
    const DpdModel fallback = agmpnn_from_mpm(*fit.warm_start, spec.m_experts);
    const double source = feedback_linearization_db(pa, fallback, chi, options);
    fit.report.fit_linearization_nmse_db = std::min(trained, source);
    if (source < trained) {
      fit.model = fallback;
      fit.report.postinverse_nmse_db = *fit.report.warm_start_postinverse_nmse_db;
      fit.report.fell_back_to_warm_start = true;
    }
  }
  return fit;
}

IlaFit ila_fit_searched(const PaConfig& pa, const ComplexSequence& chi, TapWindow window, std::size_t budget_lo,
                        std::size_t budget_hi, const std::vector<WidthPair>& grid, const TrainConfig& train_cfg,
                        std::uint32_t model_seed, const IlaOptions& options) {
  IlaFit fit = run_ila(pa, chi, options, [&](const PostinverseData& pd) {
    const SegmentSplit split = make_segments(pd.input.size(), window, train_cfg.segment_len, train_cfg.val_fraction);
    const Dataset data{pd.input, pd.target, split.train, split.val};
    SearchResult search = architecture_search(window, budget_lo, budget_hi, data, grid, train_cfg, model_seed);
    IlaFit f{search.model, {}, search.history, std::nullopt, std::nullopt};
    f.report.postinverse_nmse_db = ranges_nmse_db(search.model, data.input, data.target, data.val);
    f.search = std::move(search);
    return f;
  });
  fit.report.seeds.model = model_seed;
  return fit;
}

IlaReport ila_deploy_eval(const PaConfig& pa, const DpdModel& model, const ComplexSequence& chi_fresh,
                          IlaReport report) {
  fill_shape(report, model);
  if (report.preset.empty()) report.preset = pa.name;
  const Linearization lin = linearization(pa, model, chi_fresh, std::nullopt);
  report.gain_eval = lin.gain;
  report.linearization_nmse_db = lin.nmse_db;
  report.no_dpd_nmse_db = linearization(pa, identity_dpd(), chi_fresh, std::nullopt, window_of(model)).nmse_db;
  report.improved = report.linearization_nmse_db <= report.no_dpd_nmse_db;
  return report;
}

double feedback_linearization_db(const PaConfig& pa, const DpdModel& model, const ComplexSequence& chi,
                                 const IlaOptions& options) {
  const auto noise = options.feedback_noise
                         ? std::optional<std::uint32_t>(options.noise_seed + static_cast<std::uint32_t>(options.iterations))
                         : std::nullopt;
  return linearization(pa, model, chi, noise).nmse_db;
}

}  // namespace dpdlab

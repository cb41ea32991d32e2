#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <fstream>
#include <optional>
#include <string>

#include "dpdlab/config.hpp"
#include "dpdlab/errors.hpp"
#include "dpdlab/iq_io.hpp"
#include "dpdlab/model_io.hpp"
#include "dpdlab/simd/kernels.hpp"
#include "dpdlab/structured_text.hpp"
#include "dpdlab/sweep.hpp"

namespace dpdlab::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

RunConfig config_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

TapWindow window_for(std::size_t taps, std::size_t post_taps) {
  if (taps == 0) throw ArgumentError("--taps must be at least 1");
  if (post_taps >= taps) throw ArgumentError("--post-taps must be smaller than --taps");
  return TapWindow{taps - 1 - post_taps, post_taps};
}

std::string report_text(const IlaReport& r) {
  std::string s = "[report]\n";
  s += "family = " + std::string(family_name(r.family)) + "\n";
  s += "preset = " + r.preset + "\n";
  s += "taps = " + std::to_string(r.taps) + "\n";
  s += "k_orders = " + std::to_string(r.k_orders) + "\n";
  s += "m_experts = " + std::to_string(r.m_experts) + "\n";
  s += "params_formula = " + std::to_string(r.params_formula) + "\n";
  s += "params_actual = " + std::to_string(r.params_actual) + "\n";
  s += "postinv_nmse_db = " + fmt(r.postinverse_nmse_db) + "\n";
  if (r.warm_start_postinverse_nmse_db) s += "warm_start_postinv_nmse_db = " + fmt(*r.warm_start_postinverse_nmse_db) + "\n";
  s += "lin_nmse_db = " + fmt(r.linearization_nmse_db) + "\n";
  s += "no_dpd_nmse_db = " + fmt(r.no_dpd_nmse_db) + "\n";
  if (r.fit_linearization_nmse_db) s += "fit_lin_nmse_db = " + fmt(*r.fit_linearization_nmse_db) + "\n";
  if (r.fell_back_to_warm_start) s += "fell_back_to_warm_start = true\n";
  s += "improved = " + std::string(r.improved ? "true" : "false") + "\n";
  s += "fit_delay = " + std::to_string(r.fit_delay) + "\n";
  s += "gain_fit = " + fmt(r.gain_fit.real()) + " " + fmt(r.gain_fit.imag()) + "\n";
  s += "gain_eval = " + fmt(r.gain_eval.real()) + " " + fmt(r.gain_eval.imag()) + "\n";
  s += "seed_fit_signal = " + std::to_string(r.seeds.fit_signal) + "\n";
  s += "seed_eval_signal = " + std::to_string(r.seeds.eval_signal) + "\n";
  s += "seed_noise = " + std::to_string(r.seeds.noise) + "\n";
  s += "seed_model = " + std::to_string(r.seeds.model) + "\n";
  return s;
}

struct ModelFlags {
  std::string kind;
  std::size_t taps = 4;
  std::size_t post_taps = 0;
  std::size_t k = 4;
  std::size_t m = 3;
  std::size_t n1 = 16;
  std::size_t n2 = 16;
  std::uint32_t seed = 1;
  std::optional<double> ridge;
  bool cold_start = false;
};

void add_model_flags(CLI::App* sub, ModelFlags& f, bool kind_required) {
  auto* kind = sub->add_option("--model", f.kind, "Model family: mpm, agmpnn or rvftdnn")
                   ->check(CLI::IsMember({"mpm", "agmpnn", "rvftdnn"}));
  if (kind_required) kind->required();
  sub->add_option("--taps", f.taps, "Tap count T")->check(CLI::PositiveNumber);
  sub->add_option("--post-taps", f.post_taps, "Non-causal taps among T");
  sub->add_option("--k", f.k, "Amplitude orders K (mpm, agmpnn)")->check(CLI::PositiveNumber);
  sub->add_option("--m", f.m, "Experts M (agmpnn)")->check(CLI::PositiveNumber);
  sub->add_option("--n1", f.n1, "First hidden width (rvftdnn)")->check(CLI::PositiveNumber);
  sub->add_option("--n2", f.n2, "Second hidden width (rvftdnn)")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "Model initialization and shuffling seed");
  sub->add_option("--ridge", f.ridge, "LS ridge; omit for the default scaled ridge");
  sub->add_flag("--cold-start", f.cold_start, "AGMPNN: random init instead of the LS-MPM warm start");
}

// Applies flags given on the command line over `spec`.
void apply_model_flags(CLI::App* sub, const ModelFlags& f, ModelSpec& spec) {
  if (!f.kind.empty()) spec.family = parse_family(f.kind);
  if (sub->count("--taps") || sub->count("--post-taps")) spec.window = window_for(f.taps, f.post_taps);
  if (sub->count("--k")) spec.k_orders = f.k;
  if (sub->count("--m")) spec.m_experts = f.m;
  if (sub->count("--n1")) spec.n1 = f.n1;
  if (sub->count("--n2")) spec.n2 = f.n2;
  if (sub->count("--seed")) spec.model_seed = f.seed;
  if (f.ridge) spec.ridge = f.ridge;
  if (f.cold_start) spec.warm_start = false;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Digital predistortion lab: PA simulation, MPM/AGMPNN/RVFTDNN fitting and ILA sweeps", "dpdlab"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  std::string isa = "auto";
  app.add_option("--isa", isa, "Kernel set: auto, scalar or avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  std::function<void()> action;

  // gen-signal
  auto* gen = app.add_subcommand("gen-signal", "Generate a band-limited complex Gaussian test waveform");
  std::uint32_t gen_seed = 1;
  std::size_t gen_n = 65536;
  double gen_bw = 0.25;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "Waveform seed");
  gen->add_option("--n", gen_n, "Number of samples");
  gen->add_option("--bw", gen_bw, "Occupied bandwidth as a fraction of the sample rate");
  gen->add_option("--out", gen_out, "Output file (.iq DPDIQ1, .csv text)")->required();
  gen->callback([&] {
    action = [&] { save_samples(generate_waveform(gen_seed, gen_n, gen_bw), gen_out); };
  });

  // simulate-pa
  auto* sim = app.add_subcommand("simulate-pa", "Pass a waveform through the simulated PA");
  std::string sim_in, sim_out, sim_preset = "low", sim_config;
  std::uint32_t sim_noise_seed = 0;
  sim->add_option("--in", sim_in, "Input waveform")->required();
  sim->add_option("--out", sim_out, "Output waveform")->required();
  sim->add_option("--preset", sim_preset, "PA preset when no --config is given")
      ->check(CLI::IsMember({"low", "high"}));
  sim->add_option("--config", sim_config, "Config file whose [pa] section defines the PA");
  sim->add_option("--noise-seed", sim_noise_seed, "Add feedback noise at the configured SNR with this seed");
  sim->callback([&] {
    action = [&] {
      const PaConfig pa = sim_config.empty() ? preset(parse_distortion_level(sim_preset)) : load_config(sim_config).pa;
      const auto noise = sim->count("--noise-seed") ? std::optional<std::uint32_t>(sim_noise_seed) : std::nullopt;
      save_samples(pa_forward(pa, load_samples(sim_in), noise), sim_out);
    };
  });

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a compensator mapping --in to --target");
  ModelFlags fit_flags;
  std::string fit_in, fit_target, fit_out, fit_config, fit_history;
  add_model_flags(fit, fit_flags, true);
  fit->add_option("--in", fit_in, "Compensator input waveform")->required();
  fit->add_option("--target", fit_target, "Desired compensator output waveform")->required();
  fit->add_option("--out", fit_out, "Model file to write")->required();
  fit->add_option("--config", fit_config, "Config file supplying [model] and [train] settings");
  fit->add_option("--history", fit_history, "Write the per-epoch training trace as CSV");
  fit->callback([&] {
    action = [&] {
      const RunConfig cfg = config_or_default(fit_config);
      ModelSpec spec = cfg.model;
      apply_model_flags(fit, fit_flags, spec);
      const ComplexSequence in = load_samples(fit_in);
      const ComplexSequence target = load_samples(fit_target);
      if (in.size() != target.size()) throw ArgumentError("--in and --target lengths differ");
      const SampleRange all = usable_range(in.size(), spec.window);
      DpdModel model = identity_dpd();
      if (spec.family == ModelFamily::mpm) {
        // LS uses every usable sample; the printed figure is its residual.
        const MpmSpec ms{spec.window, spec.k_orders, 0.0};
        model = ls_fit(build_basis(in.samples(), ms, all), gather(target.samples(), {&all, 1}), spec.ridge);
      } else {
        IlaFit f = fit_postinverse(in.samples(), target.samples(), spec, cfg.train);
        out << "val_nmse_db = " << fmt(f.report.postinverse_nmse_db) << "\n";
        if (f.history) {
          out << "best_epoch = " << f.history->best_epoch << "\n";
          if (!fit_history.empty()) f.history->write_csv(fit_history);
        }
        model = std::move(f.model);
      }
      const std::vector<SampleRange> ranges{all};
      const double nmse = std::visit(
          [&](const auto& m) { return ranges_nmse_db(m, in.samples(), target.samples(), ranges); }, model);
      save_model(fit_out, model);
      out << "params = " << params_actual(model) << "\n";
      out << "nmse_db = " << fmt(nmse) << "\n";
    };
  });

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a model file against a target waveform");
  std::string ev_model, ev_in, ev_target, ev_out;
  ev->add_option("--model", ev_model, "Model file")->required();
  ev->add_option("--in", ev_in, "Compensator input waveform")->required();
  ev->add_option("--target", ev_target, "Reference waveform")->required();
  ev->add_option("--out", ev_out, "Write the model output waveform here");
  ev->callback([&] {
    action = [&] {
      const DpdModel model = load_model(ev_model);
      const ComplexSequence in = load_samples(ev_in);
      const ComplexSequence target = load_samples(ev_target);
      if (in.size() != target.size()) throw ArgumentError("--in and --target lengths differ");
      const std::vector<SampleRange> ranges{usable_range(in.size(), window_of(model))};
      const double nmse = std::visit(
          [&](const auto& m) { return ranges_nmse_db(m, in.samples(), target.samples(), ranges); }, model);
      if (!ev_out.empty()) save_samples(apply_dpd(model, in), ev_out);
      out << "nmse_db = " << fmt(nmse) << "\n";
    };
  });

  // ila-run
  auto* ila = app.add_subcommand("ila-run", "Indirect learning on the simulated PA, then deployment on a fresh waveform");
  ModelFlags ila_flags;
  std::string ila_config, ila_preset, ila_out, ila_model_out, ila_history;
  bool ila_search = false;
  add_model_flags(ila, ila_flags, false);
  ila->add_option("--config", ila_config, "Config file; omitted sections keep defaults");
  ila->add_option("--preset", ila_preset, "Override the configured PA with a preset")
      ->check(CLI::IsMember({"low", "high"}));
  ila->add_flag("--search", ila_search, "RVFTDNN: search widths within the [sweep] budget");
  ila->add_option("--out", ila_out, "Report file (default: standard output)");
  ila->add_option("--model-out", ila_model_out, "Write the fitted model");
  ila->add_option("--history", ila_history, "Write the per-epoch training trace as CSV");
  ila->callback([&] {
    action = [&] {
      const RunConfig cfg = config_or_default(ila_config);
      ModelSpec spec = cfg.model;
      apply_model_flags(ila, ila_flags, spec);
      const PaConfig pa = ila_preset.empty() ? cfg.pa : preset(parse_distortion_level(ila_preset));
      const std::uint32_t fit_seed = cfg.signal.seed;
      const std::uint32_t eval_seed = cfg.signal.seed + 100000u;
      const ComplexSequence chi = generate_waveform(fit_seed, cfg.signal.n_samples, cfg.signal.bandwidth_fraction);
      const ComplexSequence fresh = generate_waveform(eval_seed, cfg.signal.n_samples, cfg.signal.bandwidth_fraction);
      TrainConfig train = cfg.train;
      if (ila->count("--seed")) train.seed = spec.model_seed;
      IlaFit f = (ila_search && spec.family == ModelFamily::rvftdnn)
                     ? ila_fit_searched(pa, chi, spec.window, cfg.sweep.budget_lo, cfg.sweep.budget_hi,
                                        cfg.sweep.rvftdnn_grid, train, spec.model_seed, cfg.ila)
                     : ila_fit(pa, chi, spec, train, cfg.ila);
      IlaReport report = ila_deploy_eval(pa, f.model, fresh, f.report);
      report.seeds.fit_signal = fit_seed;
      report.seeds.eval_signal = eval_seed;
      if (!ila_model_out.empty()) save_model(ila_model_out, f.model);
      if (!ila_history.empty() && f.history) f.history->write_csv(ila_history);
      write_text(ila_out, report_text(report), out);
    };
  });

  // sweep-taps
  auto* st = app.add_subcommand("sweep-taps", "NMSE versus tap count for every family under the parameter budget");
  std::string st_config, st_out, st_preset;
  st->add_option("--config", st_config, "Config file with a [sweep] section listing seeds")->required();
  st->add_option("--out", st_out, "CSV output (default: standard output)");
  st->add_option("--preset", st_preset, "Override the configured PA with a preset")
      ->check(CLI::IsMember({"low", "high"}));
  st->callback([&] {
    action = [&] {
      const RunConfig cfg = load_config(st_config);
      const PaConfig pa = st_preset.empty() ? cfg.pa : preset(parse_distortion_level(st_preset));
      write_text(st_out, to_csv(sweep_taps(pa, effective_sweep(cfg))), out);
    };
  });

  // sweep-complexity
  auto* sc = app.add_subcommand("sweep-complexity", "NMSE versus parameter count for every family and preset");
  std::string sc_config, sc_out;
  sc->add_option("--config", sc_config, "Config file with a [sweep] section listing seeds")->required();
  sc->add_option("--out", sc_out, "CSV output (default: standard output)");
  sc->callback([&] {
    action = [&] {
      const RunConfig cfg = load_config(sc_config);
      write_text(sc_out, to_csv(sweep_complexity(cfg.sweep_presets, effective_sweep(cfg))), out);
    };
  });

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of a model's analytic gradient");
  std::string gc_model = "agmpnn";
  std::size_t gc_taps = 3, gc_k = 2, gc_m = 2, gc_n1 = 4, gc_n2 = 3, gc_n = 64;
  std::uint32_t gc_seed = 1;
  double gc_tol = 1e-4;
  gc->add_option("--model", gc_model, "agmpnn or rvftdnn")->check(CLI::IsMember({"agmpnn", "rvftdnn"}));
  gc->add_option("--taps", gc_taps, "Tap count T")->check(CLI::PositiveNumber);
  gc->add_option("--k", gc_k, "Amplitude orders K")->check(CLI::PositiveNumber);
  gc->add_option("--m", gc_m, "Experts M")->check(CLI::PositiveNumber);
  gc->add_option("--n1", gc_n1, "First hidden width")->check(CLI::PositiveNumber);
  gc->add_option("--n2", gc_n2, "Second hidden width")->check(CLI::PositiveNumber);
  gc->add_option("--n", gc_n, "Samples in the loss window");
  gc->add_option("--seed", gc_seed, "Seed for parameters and data");
  gc->add_option("--tol", gc_tol, "Maximum accepted relative error");
  gc->callback([&] {
    action = [&] {
      const TapWindow w{gc_taps - 1, 0};
      const std::size_t n = gc_n + w.total();
      const ComplexSequence x = generate_waveform(gc_seed, std::max<std::size_t>(n, 64), 0.5);
      const ComplexSequence y = generate_waveform(gc_seed + 1, std::max<std::size_t>(n, 64), 0.5);
      const SampleRange range{w.pre_taps, w.pre_taps + gc_n};
      const GradCheckResult r =
          gc_model == "agmpnn"
              ? finite_diff_check(random_agmpnn(w, gc_k, gc_m, gc_seed), x.samples(), y.samples(), range)
              : finite_diff_check(random_rvftdnn(w, gc_n1, gc_n2, gc_seed), x.samples(), y.samples(), range);
      out << "n_params = " << r.n_params << "\n";
      out << "max_relative_error = " << fmt(r.max_relative_error) << "\n";
      out << "worst_index = " << r.worst_index << "\n";
      out << "status = " << (r.max_relative_error < gc_tol ? "pass" : "fail") << "\n";
      if (!(r.max_relative_error < gc_tol)) throw TrainingError("gradient check exceeded tolerance");
    };
  });

  // report
  auto* rep = app.add_subcommand("report", "Summarize a sweep CSV (mean over seeds)");
  std::string rep_in, rep_out, rep_dat, rep_flags;
  rep->add_option("--in", rep_in, "Sweep CSV")->required();
  rep->add_option("--out", rep_out, "Summary CSV (default: standard output)");
  rep->add_option("--dat", rep_dat, "Also write a gnuplot-compatible .dat mirror");
  rep->add_option("--flags", rep_flags, "Also write per family and preset monotonicity flags as CSV");
  rep->callback([&] {
    action = [&] {
      const auto summary = summarize(parse_sweep_csv(read_text_file(rep_in)));
      write_text(rep_out, summary_csv(summary), out);
      if (!rep_dat.empty()) write_text(rep_dat, summary_dat(summary), out);
      if (!rep_flags.empty()) write_text(rep_flags, monotonicity_csv(monotonicity(summary)), out);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "dpdlab: " << e.what() << "\n";
    err << app.help();
    return kExitUsage;
  }

  try {
    if (isa != "auto") simd::select_isa(isa == "avx2" ? simd::Isa::avx2 : simd::Isa::scalar);
    action();
  } catch (const std::exception& e) {
    err << "dpdlab: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace dpdlab::cli

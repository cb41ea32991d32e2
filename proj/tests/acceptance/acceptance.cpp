// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: acceptance <dpdlab cli> <work dir>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dpdlab/config.hpp"
#include "dpdlab/ila.hpp"
#include "dpdlab/lstsq.hpp"
#include "dpdlab/sweep.hpp"
#include "test_util.hpp"

using namespace dpdlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double limit_s;
  std::function<Outcome()> run;
};

std::string printf_string(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

// Training schedule for the harness runs: shorter segments give the
// optimizer enough steps per epoch on 65536-sample waveforms.
TrainConfig harness_train(std::uint32_t seed) {
  TrainConfig cfg;
  cfg.segment_len = 128;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-3;
  cfg.max_epochs = 40;
  cfg.patience = 8;
  cfg.seed = seed;
  return cfg;
}

// Criteria about trained models disable the fall-back to the LS-MPM source.
IlaOptions harness_ila(std::uint32_t seed, bool deploy_select = true) {
  IlaOptions opt;
  opt.noise_seed = derive_seeds(seed).noise;
  opt.deploy_select = deploy_select;
  return opt;
}

ComplexSequence fit_waveform(std::uint32_t seed) { return generate_waveform(derive_seeds(seed).fit_signal, 65536, 0.25); }
ComplexSequence eval_waveform(std::uint32_t seed) {
  return generate_waveform(derive_seeds(seed).eval_signal, 65536, 0.25);
}

ModelSpec agmpnn_spec(std::size_t taps, std::size_t k, std::size_t m, std::uint32_t seed) {
  ModelSpec s;
  s.family = ModelFamily::agmpnn;
  s.window = TapWindow{taps - 1, 0};
  s.k_orders = k;
  s.m_experts = m;
  s.model_seed = seed;
  return s;
}

Outcome c1_formula() {
  bool ok = count_params_formula(7, 3, 3) == 309;
  for (std::size_t l = 4; l <= 10; ++l) ok = ok && count_params_formula(l, 3, 3) == 43 * (l - 1) + 51;
  return {ok, printf_string("formula(7,3,3) = %zu", count_params_formula(7, 3, 3))};
}

Outcome c2_table() {
  const std::size_t rows[14][3] = {{4, 17, 15}, {5, 13, 13}, {6, 18, 17}, {7, 16, 16}, {8, 19, 12},
                                   {9, 13, 17}, {10, 16, 11}, {4, 17, 17}, {5, 18, 18}, {6, 15, 10},
                                   {7, 16, 16}, {8, 15, 10}, {9, 16, 12}, {10, 15, 14}};
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& r : rows) {
    const std::size_t c = rvftdnn_param_count(r[0], r[1], r[2]);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return {lo >= 100 && hi <= 600, printf_string("14 rows, counts in [%zu, %zu]", lo, hi)};
}

Outcome c3_reduction() {
  double worst = 0.0;
  for (std::uint32_t seed = 1; seed <= 10; ++seed) {
    const TapWindow w{seed % 5, 0};
    AgmpnnModel m = random_agmpnn(w, 1 + seed % 4, 1, seed);
    m.offsets[0] = 0.0;
    const MpmCoefficients mpm{MpmSpec{w, m.k_orders, 0.0}, m.lambda};
    const auto psi = ComplexSequence(testutil::random_samples(1000 + seed, 512, 0.7));
    const auto a = forward(m, psi), b = mpm_predict(mpm, psi);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      num = std::max(num, std::abs(a[i] - b[i]));
      den = std::max(den, std::abs(b[i]));
    }
    worst = std::max(worst, num / den);
  }
  return {worst <= 1e-12, printf_string("max relative deviation %.3e over 10 seeds", worst)};
}

Outcome c4_gradients() {
  double worst = 0.0;
  for (std::uint32_t seed = 1; seed <= 3; ++seed) {
    const TapWindow w{2, 0};
    const auto psi = generate_waveform(seed + 500, 64, 0.5), target = generate_waveform(seed + 501, 64, 0.5);
    const SampleRange range{w.pre_taps, 40};
    worst = std::max(worst, finite_diff_check(random_agmpnn(w, 2, 2, seed), psi.samples(), target.samples(), range)
                                .max_relative_error);
    worst = std::max(worst, finite_diff_check(random_agmpnn(w, 1, 3, seed), psi.samples(), target.samples(), range)
                                .max_relative_error);
    worst = std::max(worst, finite_diff_check(random_rvftdnn(w, 4, 3, seed), psi.samples(), target.samples(), range)
                                .max_relative_error);
  }
  return {worst < 1e-4, printf_string("max relative error %.3e (9 checks)", worst)};
}

std::vector<cplx> pinv_solve(const CMatrix& a, std::span<const cplx> b) {
  Eigen::MatrixXcd m(a.rows(), a.cols());
  for (std::size_t c = 0; c < a.cols(); ++c) {
    for (std::size_t r = 0; r < a.rows(); ++r) m(r, c) = a(r, c);
  }
  Eigen::VectorXcd rhs(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) rhs(i) = b[i];
  const Eigen::VectorXcd x = m.completeOrthogonalDecomposition().solve(rhs);
  return {x.data(), x.data() + x.size()};
}

Outcome c5_lstsq() {
  double worst = 0.0;
  std::size_t problems = 0;
  for (std::size_t cols : {4u, 16u, 32u}) {
    const auto v = testutil::random_samples(static_cast<std::uint32_t>(cols), 4096 * cols);
    CMatrix a(4096, cols);
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t r = 0; r < 4096; ++r) a(r, c) = v[c * 4096 + r];
    }
    const auto b = testutil::random_samples(77, 4096);
    const auto x = solve_least_squares(a, b, 0.0), ref = pinv_solve(a, b);
    for (std::size_t i = 0; i < cols; ++i) worst = std::max(worst, std::abs(x[i] - ref[i]));
    ++problems;
  }
  const auto psi = generate_waveform(21, 4096 + 7, 0.25);
  const auto phi = testutil::random_samples(22, psi.size());
  for (auto [t, k] : {std::pair<std::size_t, std::size_t>{1, 4}, {4, 4}, {8, 4}, {7, 3}, {4, 8}}) {
    const MpmSpec spec{TapWindow{t - 1, 0}, k, 0.0};
    const SampleRange range{7, psi.size()};
    const BasisMatrix basis = build_basis(psi.samples(), spec, range);
    const auto targets = gather(phi, {&range, 1});
    const auto fit = ls_fit(basis, targets, 0.0);
    const auto ref = pinv_solve(basis.values, targets);
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(fit.lambda[i] - ref[i]));
    ++problems;
  }
  return {worst <= 1e-8, printf_string("max |coef - pinv| %.3e over %zu problems", worst, problems)};
}

Outcome c6_lower_bound() {
  const PaConfig pa = preset(DistortionLevel::high);
  bool ok = true;
  std::string detail;
  for (std::uint32_t seed = 1; seed <= 3; ++seed) {
    const IlaFit f = ila_fit(pa, fit_waveform(seed), agmpnn_spec(7, 3, 3, seed), harness_train(seed),
                             harness_ila(seed, false));
    const double warm = f.report.warm_start_postinverse_nmse_db.value_or(NAN);
    const double trained = f.report.postinverse_nmse_db;
    ok = ok && trained <= warm + 0.01;
    detail += printf_string("%sseed %u: %.3f vs warm %.3f", seed == 1 ? "" : "; ", seed, trained, warm);
  }
  return {ok, detail};
}

Outcome c7_linearization() {
  const PaConfig pa = preset(DistortionLevel::low);
  ModelSpec spec;
  spec.window = TapWindow{3, 0};
  spec.k_orders = 4;
  const IlaFit f = ila_fit(pa, generate_waveform(11, 65536, 0.25), spec, TrainConfig{});
  const IlaReport r = ila_deploy_eval(pa, f.model, generate_waveform(12, 65536, 0.25), f.report);
  const double gain = r.no_dpd_nmse_db - r.linearization_nmse_db;
  return {gain >= 10.0, printf_string("lin %.3f dB, no-DPD %.3f dB, improvement %.3f dB", r.linearization_nmse_db,
                                      r.no_dpd_nmse_db, gain)};
}

Outcome c8_advantage() {
  const PaConfig pa = preset(DistortionLevel::high);
  const std::size_t target = count_params_formula(7, 3, 3);
  const std::size_t lo = target - target / 10, hi = target + target / 10;
  int wins = 0;
  std::string detail = printf_string("budget [%zu, %zu]", lo, hi);
  for (std::uint32_t seed = 1; seed <= 3; ++seed) {
    const ComplexSequence chi = fit_waveform(seed), fresh = eval_waveform(seed);
    const IlaFit ag = ila_fit(pa, chi, agmpnn_spec(7, 3, 3, seed), harness_train(seed), harness_ila(seed, false));
    const IlaReport ra = ila_deploy_eval(pa, ag.model, fresh, ag.report);
    const IlaFit rv = ila_fit_searched(pa, chi, TapWindow{6, 0}, lo, hi, default_search_grid(), harness_train(seed),
                                       seed, harness_ila(seed, false));
    const IlaReport rr = ila_deploy_eval(pa, rv.model, fresh, rv.report);
    if (ra.linearization_nmse_db <= rr.linearization_nmse_db) ++wins;
    detail += printf_string("; seed %u: agmpnn %.3f vs rvftdnn(%zu,%zu; %zu) %.3f", seed, ra.linearization_nmse_db,
                            rv.search->n1, rv.search->n2, rr.params_actual, rr.linearization_nmse_db);
  }
  return {wins >= 2, printf_string("%d/3 wins, ", wins) + detail};
}

Outcome c9_attention() {
  RandomSource rng(9);
  double worst_sum = 0.0, worst_sym = 0.0;
  for (std::uint32_t trial = 0; trial < 1000; ++trial) {
    const std::size_t t = 1 + trial % 7;
    std::vector<cplx> taps(t);
    for (cplx& v : taps) v = 2.0 * rng.complex_normal();
    const AgmpnnModel m = random_agmpnn(TapWindow{t - 1, 0}, 2, 1 + trial % 5, trial);
    double sum = 0.0;
    for (double w : attention_weights(m, taps)) sum += w;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));

    AgmpnnModel sym = random_agmpnn(TapWindow{t - 1, 0}, 2, 2, trial);
    sym.offsets[1] = sym.offsets[0];
    for (std::size_t l = 0; l < t; ++l) {
      sym.mu[sym.gate_index(1, l)] = sym.mu[sym.gate_index(0, l)];
      sym.nu[sym.gate_index(1, l)] = sym.nu[sym.gate_index(0, l)];
    }
    for (double w : attention_weights(sym, taps)) worst_sym = std::max(worst_sym, std::abs(w - 0.5));
  }
  return {worst_sum <= 1e-12 && worst_sym <= 1e-12,
          printf_string("max |sum - 1| %.3e, max |w - 0.5| %.3e over 1000 windows", worst_sum, worst_sym)};
}

Outcome c10_determinism(const std::string& cli, const fs::path& work) {
  const fs::path cfg = work / "sweep.cfg";
  {
    std::ofstream f(cfg);
    f << "[pa]\npreset = high\n"
         "[signal]\nn_samples = 8192\n"
         "[train]\nsegment_len = 256\nbatch_size = 8\nmax_epochs = 3\npatience = 2\n"
         "[sweep]\nfamilies = mpm, agmpnn, rvftdnn\ntaps = 2, 3, 4\nseeds = 1, 2\nbudget_lo = 50\nbudget_hi = 200\n"
         "rvftdnn_n1 = 4, 6, 8\nrvftdnn_n2 = 4, 6\n";
  }
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = work / ("sweep_" + std::to_string(i) + ".csv");
    const std::string cmd = "\"" + cli + "\" sweep-taps --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"";
    if (std::system(cmd.c_str()) != 0) return {false, "sweep-taps exited nonzero"};
    csv[i] = read_text_file(out);
  }
  const auto lines = std::count(csv[0].begin(), csv[0].end(), '\n');
  return {!csv[0].empty() && csv[0] == csv[1],
          printf_string("%ld CSV lines, %s", static_cast<long>(lines), csv[0] == csv[1] ? "identical" : "different")};
}

Outcome c11_noise_floor() {
  double best = 0.0;
  std::string who;
  for (auto level : {DistortionLevel::low, DistortionLevel::high}) {
    const PaConfig pa = preset(level);
    const ComplexSequence chi = fit_waveform(1);
    ModelSpec mpm;
    mpm.window = TapWindow{3, 0};
    mpm.k_orders = 4;
    ModelSpec rv;
    rv.family = ModelFamily::rvftdnn;
    rv.window = TapWindow{3, 0};
    for (const ModelSpec& spec : {mpm, agmpnn_spec(4, 3, 3, 1), rv}) {
      const IlaFit f = ila_fit(pa, chi, spec, harness_train(1), harness_ila(1));
      if (f.report.postinverse_nmse_db < best) {
        best = f.report.postinverse_nmse_db;
        who = std::string(family_name(spec.family)) + "/" + pa.name;
      }
    }
  }
  return {best >= -43.0, printf_string("best postinverse %.3f dB (%s)", best, who.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: acceptance <dpdlab cli> <work dir>\n");
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work = argv[2];
  fs::create_directories(work);

  const std::vector<Criterion> criteria{
      {1, "parameter-count identity", 1, c1_formula},
      {2, "published RVFTDNN rows within budget", 1, c2_table},
      {3, "AGMPNN reduces to MPM", 1, c3_reduction},
      {4, "gradient correctness", 30, c4_gradients},
      {5, "LS matches pseudo-inverse", 5, c5_lstsq},
      {6, "trained AGMPNN not worse than warm start", 300, c6_lower_bound},
      {7, "LS-MPM linearization improvement", 60, c7_linearization},
      {8, "AGMPNN vs searched RVFTDNN", 1800, c8_advantage},
      {9, "attention sanity", 1, c9_attention},
      {10, "sweep determinism", 600, [&] { return c10_determinism(cli, work); }},
      {11, "feedback noise floor", 300, c11_noise_floor},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s  %2d  %-42s %8.2f s (limit %g s)  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.title, secs, c.limit_s,
                o.detail.c_str(), in_time ? "" : " [time limit exceeded]");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

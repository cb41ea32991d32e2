#include "dpdlab/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <limits>
#include <tuple>

#include "dpdlab/errors.hpp"
#include "dpdlab/structured_text.hpp"

namespace dpdlab {

void SweepSettings::validate() const {
  if (seeds.empty()) throw ArgumentError("sweep: at least one seed is required");
  if (families.empty()) throw ArgumentError("sweep: at least one model family is required");
  if (budget_lo > budget_hi) throw ArgumentError("sweep: budget_lo exceeds budget_hi");
  train.validate();
}

IlaSeeds derive_seeds(std::uint32_t seed) noexcept { return {seed, seed + 100000u, seed + 200000u, seed}; }

SweepRow row_from_report(const IlaReport& r, std::uint32_t seed) {
  SweepRow row;
  row.family = r.family;
  row.preset = r.preset;
  row.taps = r.taps;
  row.k_orders = r.k_orders;
  row.m_experts = r.m_experts;
  row.params_formula = r.params_formula;
  row.params_actual = r.params_actual;
  row.seed = seed;
  row.postinv_nmse_db = r.postinverse_nmse_db;
  row.lin_nmse_db = r.linearization_nmse_db;
  row.no_dpd_nmse_db = r.no_dpd_nmse_db;
  return row;
}

namespace {

struct Waveforms {
  ComplexSequence fit;
  ComplexSequence eval;
};

Waveforms waveforms_for(std::uint32_t seed, const SweepSettings& s) {
  const IlaSeeds seeds = derive_seeds(seed);
  return {generate_waveform(seeds.fit_signal, s.n_samples, s.bandwidth_fraction),
          generate_waveform(seeds.eval_signal, s.n_samples, s.bandwidth_fraction)};
}

TrainConfig seeded(TrainConfig cfg, std::uint32_t seed) {
  cfg.seed = seed;
  return cfg;
}

IlaOptions seeded(IlaOptions opt, std::uint32_t seed) {
  opt.noise_seed = derive_seeds(seed).noise;
  return opt;
}

SweepRow finish(IlaFit& fit, const PaConfig& pa, const Waveforms& w, std::uint32_t seed) {
  IlaReport report = ila_deploy_eval(pa, fit.model, w.eval, fit.report);
  report.seeds = derive_seeds(seed);
  return row_from_report(report, seed);
}

SweepRow infeasible_row(ModelFamily family, const PaConfig& pa, std::size_t taps, std::uint32_t seed) {
  SweepRow row;
  row.family = family;
  row.preset = pa.name;
  row.taps = taps;
  row.seed = seed;
  row.infeasible = true;
  return row;
}

// Best-K LS-MPM within the budget. High orders extrapolate badly beyond the
// compressed amplitudes seen while fitting, so with deploy_select the choice
// uses linearization of the fitting waveform rather than postinverse NMSE.
IlaFit fit_best_mpm(const PaConfig& pa, const Waveforms& w, std::size_t taps, std::size_t max_k,
                    const SweepSettings& s, std::uint32_t seed) {
  const IlaOptions ila = seeded(s.ila, seed);
  std::optional<IlaFit> best;
  double best_score = 0.0;
  for (std::size_t k = 1; k <= max_k; ++k) {
    ModelSpec spec;
    spec.family = ModelFamily::mpm;
    spec.window = TapWindow{taps - 1, 0};
    spec.k_orders = k;
    IlaFit fit = ila_fit(pa, w.fit, spec, seeded(s.train, seed), ila);
    double score = fit.report.postinverse_nmse_db;
    if (ila.deploy_select) {
      score = feedback_linearization_db(pa, fit.model, w.fit, ila);
      fit.report.fit_linearization_nmse_db = score;
    }
    if (!best || score < best_score) {
      best = std::move(fit);
      best_score = score;
    }
  }
  return std::move(*best);
}

}  // namespace

ComplexityChoice choose_for_target(ModelFamily family, std::size_t taps, std::size_t target,
                                   const SweepSettings& settings) {
  ComplexityChoice best;
  auto distance = [&](std::size_t count) {
    return count > target ? count - target : target - count;
  };
  bool have = false;
  auto consider = [&](ComplexityChoice c) {
    const auto key = std::make_tuple(distance(c.params), c.params, c.k_orders, c.m_experts, c.n1, c.n2);
    const auto best_key =
        std::make_tuple(distance(best.params), best.params, best.k_orders, best.m_experts, best.n1, best.n2);
    if (!have || key < best_key) {
      best = c;
      have = true;
    }
  };
  switch (family) {
    case ModelFamily::mpm:
      for (std::size_t k = 1; k <= settings.mpm_max_k; ++k) consider({k, 0, 0, 0, 2 * taps * k});
      break;
    case ModelFamily::agmpnn:
      for (std::size_t k = 1; k <= settings.agmpnn_max_k; ++k) {
        for (std::size_t m = 1; m <= settings.agmpnn_max_m; ++m) consider({k, m, 0, 0, count_params_formula(taps, k, m)});
      }
      break;
    case ModelFamily::rvftdnn:
      for (const auto& [n1, n2] : settings.rvftdnn_grid) consider({0, 0, n1, n2, rvftdnn_param_count(taps, n1, n2)});
      break;
  }
  if (!have) throw ArgumentError("choose_for_target: no candidate configuration");
  return best;
}

std::vector<SweepRow> sweep_taps(const PaConfig& pa, const SweepSettings& s) {
  s.validate();
  if (s.taps_list.empty()) throw ArgumentError("sweep_taps: empty taps list");
  std::vector<SweepRow> rows;
  for (ModelFamily family : s.families) {
    for (std::size_t taps : s.taps_list) {
      if (taps == 0) throw ArgumentError("sweep_taps: taps must be positive");
      const TapWindow window{taps - 1, 0};
      for (std::uint32_t seed : s.seeds) {
        const Waveforms w = waveforms_for(seed, s);
        IlaFit fit;
        switch (family) {
          case ModelFamily::mpm: {
            const std::size_t max_k = std::min(s.mpm_max_k, s.budget_hi / (2 * taps));
            if (max_k == 0) {
              rows.push_back(infeasible_row(family, pa, taps, seed));
              continue;
            }
            fit = fit_best_mpm(pa, w, taps, max_k, s, seed);
            break;
          }
          case ModelFamily::agmpnn: {
            ModelSpec spec;
            spec.family = family;
            spec.window = window;
            spec.k_orders = s.agmpnn_k;
            spec.m_experts = s.agmpnn_m;
            spec.warm_start = s.agmpnn_warm_start;
            spec.model_seed = seed;
            fit = ila_fit(pa, w.fit, spec, seeded(s.train, seed), seeded(s.ila, seed));
            break;
          }
          case ModelFamily::rvftdnn: {
            if (feasible_grid(taps, s.budget_lo, s.budget_hi, s.rvftdnn_grid).empty()) {
              rows.push_back(infeasible_row(family, pa, taps, seed));
              continue;
            }
            fit = ila_fit_searched(pa, w.fit, window, s.budget_lo, s.budget_hi, s.rvftdnn_grid, seeded(s.train, seed),
                                   seed, seeded(s.ila, seed));
            break;
          }
        }
        rows.push_back(finish(fit, pa, w, seed));
      }
    }
  }
  return rows;
}

std::vector<SweepRow> sweep_complexity(const std::vector<PaConfig>& presets, const SweepSettings& s) {
  s.validate();
  if (presets.empty() || s.param_targets.empty()) throw ArgumentError("sweep_complexity: empty preset or target list");
  const std::size_t taps = s.complexity_taps;
  const TapWindow window{taps - 1, 0};
  std::vector<SweepRow> rows;
  for (ModelFamily family : s.families) {
    for (std::size_t target : s.param_targets) {
      const ComplexityChoice choice = choose_for_target(family, taps, target, s);
      for (const PaConfig& pa : presets) {
        for (std::uint32_t seed : s.seeds) {
          const Waveforms w = waveforms_for(seed, s);
          ModelSpec spec;
          spec.family = family;
          spec.window = window;
          spec.k_orders = std::max<std::size_t>(choice.k_orders, 1);
          spec.m_experts = std::max<std::size_t>(choice.m_experts, 1);
          spec.n1 = choice.n1;
          spec.n2 = choice.n2;
          spec.warm_start = s.agmpnn_warm_start;
          spec.model_seed = seed;
          IlaFit fit = ila_fit(pa, w.fit, spec, seeded(s.train, seed), seeded(s.ila, seed));
          rows.push_back(finish(fit, pa, w, seed));
        }
      }
    }
  }
  return rows;
}

std::string sweep_csv_header() {
  return "family,preset,taps,k_orders,m_experts,params_formula,params_actual,seed,postinv_nmse_db,lin_nmse_db,"
         "no_dpd_nmse_db";
}

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::string out = sweep_csv_header() + "\n";
  char buf[512];
  for (const SweepRow& r : rows) {
    if (r.infeasible) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%zu,%zu,%zu,%zu,%u,infeasible,infeasible,infeasible\n",
                    std::string(family_name(r.family)).c_str(), r.preset.c_str(), r.taps, r.k_orders, r.m_experts,
                    r.params_formula, r.params_actual, r.seed);
    } else {
      std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%zu,%zu,%zu,%zu,%u,%.6f,%.6f,%.6f\n",
                    std::string(family_name(r.family)).c_str(), r.preset.c_str(), r.taps, r.k_orders, r.m_experts,
                    r.params_formula, r.params_actual, r.seed, r.postinv_nmse_db, r.lin_nmse_db, r.no_dpd_nmse_db);
    }
    out += buf;
  }
  return out;
}

namespace {

template <typename T>
T csv_number(const std::string& field, std::size_t line) {
  T v{};
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), last, v);
  if (ec != std::errc() || ptr != last) {
    throw FormatError("line " + std::to_string(line) + ": malformed field '" + field + "'");
  }
  return v;
}

}  // namespace

std::vector<SweepRow> parse_sweep_csv(std::string_view text) {
  std::vector<SweepRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != sweep_csv_header()) throw FormatError("line 1: unexpected sweep CSV header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::size_t a = 0;
    while (true) {
      const std::size_t c = line.find(',', a);
      f.push_back(line.substr(a, c == std::string::npos ? std::string::npos : c - a));
      if (c == std::string::npos) break;
      a = c + 1;
    }
    if (f.size() != 11) throw FormatError("line " + std::to_string(line_no) + ": expected 11 fields");
    SweepRow r;
    try {
      r.family = parse_family(f[0]);
    } catch (const ArgumentError&) {
      throw FormatError("line " + std::to_string(line_no) + ": unknown family '" + f[0] + "'");
    }
    r.preset = f[1];
    r.taps = csv_number<std::size_t>(f[2], line_no);
    r.k_orders = csv_number<std::size_t>(f[3], line_no);
    r.m_experts = csv_number<std::size_t>(f[4], line_no);
    r.params_formula = csv_number<std::size_t>(f[5], line_no);
    r.params_actual = csv_number<std::size_t>(f[6], line_no);
    r.seed = csv_number<std::uint32_t>(f[7], line_no);
    if (f[8] == "infeasible") {
      r.infeasible = true;
    } else {
      r.postinv_nmse_db = csv_number<double>(f[8], line_no);
      r.lin_nmse_db = csv_number<double>(f[9], line_no);
      r.no_dpd_nmse_db = csv_number<double>(f[10], line_no);
    }
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw FormatError("empty sweep CSV");
  return rows;
}

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
  using Key = std::tuple<int, std::string, std::size_t, std::size_t, std::size_t, std::size_t>;
  std::map<Key, SweepSummary> groups;
  std::vector<Key> order;
  for (const SweepRow& r : rows) {
    const Key key{static_cast<int>(r.family), r.preset, r.taps, r.k_orders, r.m_experts, r.params_formula};
    auto [it, inserted] = groups.try_emplace(key);
    SweepSummary& s = it->second;
    if (inserted) {
      order.push_back(key);
      s.family = r.family;
      s.preset = r.preset;
      s.taps = r.taps;
      s.k_orders = r.k_orders;
      s.m_experts = r.m_experts;
      s.params_formula = r.params_formula;
      s.params_actual = r.params_actual;
    }
    if (r.infeasible) {
      ++s.n_infeasible;
      continue;
    }
    if (s.n_seeds == 0) {
      s.min_lin_nmse_db = s.max_lin_nmse_db = r.lin_nmse_db;
    } else {
      s.min_lin_nmse_db = std::min(s.min_lin_nmse_db, r.lin_nmse_db);
      s.max_lin_nmse_db = std::max(s.max_lin_nmse_db, r.lin_nmse_db);
    }
    ++s.n_seeds;
    s.mean_postinv_nmse_db += r.postinv_nmse_db;
    s.mean_lin_nmse_db += r.lin_nmse_db;
    s.mean_no_dpd_nmse_db += r.no_dpd_nmse_db;
  }
  std::vector<SweepSummary> out;
  for (const Key& key : order) {
    SweepSummary s = groups.at(key);
    if (s.n_seeds > 0) {
      const double n = static_cast<double>(s.n_seeds);
      s.mean_postinv_nmse_db /= n;
      s.mean_lin_nmse_db /= n;
      s.mean_no_dpd_nmse_db /= n;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string summary_csv(const std::vector<SweepSummary>& summary) {
  std::string out =
      "family,preset,taps,k_orders,m_experts,params_formula,params_actual,n_seeds,n_infeasible,mean_postinv_nmse_db,"
      "mean_lin_nmse_db,mean_no_dpd_nmse_db,min_lin_nmse_db,max_lin_nmse_db\n";
  char buf[512];
  for (const SweepSummary& s : summary) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%zu,%zu,%zu,%zu,%zu,%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  std::string(family_name(s.family)).c_str(), s.preset.c_str(), s.taps, s.k_orders, s.m_experts,
                  s.params_formula, s.params_actual, s.n_seeds, s.n_infeasible, s.mean_postinv_nmse_db,
                  s.mean_lin_nmse_db, s.mean_no_dpd_nmse_db, s.min_lin_nmse_db, s.max_lin_nmse_db);
    out += buf;
  }
  return out;
}

std::string summary_dat(const std::vector<SweepSummary>& summary) {
  std::string out;
  std::string current;
  char buf[256];
  for (const SweepSummary& s : summary) {
    if (s.n_seeds == 0) continue;
    const std::string block = std::string(family_name(s.family)) + " " + s.preset;
    if (block != current) {
      if (!current.empty()) out += "\n\n";
      out += "# " + block + "\n# taps params_formula mean_postinv_nmse_db mean_lin_nmse_db mean_no_dpd_nmse_db\n";
      current = block;
    }
    std::snprintf(buf, sizeof(buf), "%zu %zu %.6f %.6f %.6f\n", s.taps, s.params_formula, s.mean_postinv_nmse_db,
                  s.mean_lin_nmse_db, s.mean_no_dpd_nmse_db);
    out += buf;
  }
  return out;
}

std::vector<MonotonicityFlag> monotonicity(const std::vector<SweepSummary>& summary, double tolerance_db) {
  std::vector<MonotonicityFlag> flags;
  std::vector<std::pair<const SweepSummary*, const SweepSummary*>> ends;
  for (const SweepSummary& s : summary) {
    if (s.n_seeds == 0) continue;
    auto it = std::find_if(flags.begin(), flags.end(),
                           [&](const MonotonicityFlag& f) { return f.family == s.family && f.preset == s.preset; });
    if (it == flags.end()) {
      flags.push_back({s.family, s.preset});
      ends.emplace_back(&s, &s);
      continue;
    }
    auto& [lo, hi] = ends[static_cast<std::size_t>(it - flags.begin())];
    if (s.params_formula < lo->params_formula) lo = &s;
    if (s.params_formula > hi->params_formula) hi = &s;
  }
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const auto [lo, hi] = ends[i];
    flags[i].smallest_params = lo->params_formula;
    flags[i].largest_params = hi->params_formula;
    flags[i].lin_at_smallest = lo->mean_lin_nmse_db;
    flags[i].lin_at_largest = hi->mean_lin_nmse_db;
    flags[i].monotone = hi->mean_lin_nmse_db <= lo->mean_lin_nmse_db + tolerance_db;
  }
  return flags;
}

std::string monotonicity_csv(const std::vector<MonotonicityFlag>& flags) {
  std::string out = "family,preset,smallest_params,largest_params,lin_at_smallest,lin_at_largest,monotone\n";
  char buf[256];
  for (const MonotonicityFlag& f : flags) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%zu,%.6f,%.6f,%s\n", std::string(family_name(f.family)).c_str(),
                  f.preset.c_str(), f.smallest_params, f.largest_params, f.lin_at_smallest, f.lin_at_largest,
                  f.monotone ? "true" : "false");
    out += buf;
  }
  return out;
}

}  // namespace dpdlab

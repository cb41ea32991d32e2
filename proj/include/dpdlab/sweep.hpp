#pragma once
// Taps and complexity sweeps over model families, emitted as CSV rows in a
// canonical order (family, taps/target, preset, seed).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpdlab/ila.hpp"

namespace dpdlab {

struct SweepRow {
  ModelFamily family = ModelFamily::mpm;
  std::string preset;
  std::size_t taps = 0;
  std::size_t k_orders = 0;
  std::size_t m_experts = 0;
  std::size_t params_formula = 0;
  std::size_t params_actual = 0;
  std::uint32_t seed = 0;
  bool infeasible = false;
  double postinv_nmse_db = 0.0;
  double lin_nmse_db = 0.0;
  double no_dpd_nmse_db = 0.0;
};

struct SweepSettings {
  std::vector<ModelFamily> families{ModelFamily::mpm, ModelFamily::agmpnn, ModelFamily::rvftdnn};
  std::vector<std::size_t> taps_list{4, 5, 6, 7, 8, 9, 10};
  std::size_t budget_lo = 100;
  std::size_t budget_hi = 600;
  std::vector<std::uint32_t> seeds;  // required
  std::vector<std::size_t> param_targets{100, 200, 300, 400, 500, 600};
  std::size_t complexity_taps = 7;

  std::size_t n_samples = 65536;
  double bandwidth_fraction = 0.25;

  std::size_t agmpnn_k = 3;
  std::size_t agmpnn_m = 3;
  std::size_t agmpnn_max_k = 5;
  std::size_t agmpnn_max_m = 5;
  bool agmpnn_warm_start = true;
  std::size_t mpm_max_k = 8;
  std::vector<WidthPair> rvftdnn_grid = default_search_grid();

  TrainConfig train;
  IlaOptions ila;

  void validate() const;
};

/// Seeds derived from a row seed: fit waveform = s, fresh evaluation
/// waveform = s + 100000, feedback noise = s + 200000, model/shuffle = s.
IlaSeeds derive_seeds(std::uint32_t seed) noexcept;

std::vector<SweepRow> sweep_taps(const PaConfig& pa, const SweepSettings& settings);
std::vector<SweepRow> sweep_complexity(const std::vector<PaConfig>& presets, const SweepSettings& settings);

/// Configuration of `family` whose complexity figure is closest to
/// `target` (ties: smaller count, then smaller parameters lexicographically).
struct ComplexityChoice {
  std::size_t k_orders = 0;
  std::size_t m_experts = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t params = 0;
};
ComplexityChoice choose_for_target(ModelFamily family, std::size_t taps, std::size_t target,
                                   const SweepSettings& settings);

std::string sweep_csv_header();
std::string to_csv(const std::vector<SweepRow>& rows);

SweepRow row_from_report(const IlaReport& report, std::uint32_t seed);

/// Inverse of to_csv; throws FormatError naming the line.
std::vector<SweepRow> parse_sweep_csv(std::string_view text);

/// Mean over seeds of each (family, preset, taps, k_orders, m_experts,
/// params_formula) group; infeasible rows are counted but not averaged.
struct SweepSummary {
  ModelFamily family = ModelFamily::mpm;
  std::string preset;
  std::size_t taps = 0;
  std::size_t k_orders = 0;
  std::size_t m_experts = 0;
  std::size_t params_formula = 0;
  std::size_t params_actual = 0;
  std::size_t n_seeds = 0;
  std::size_t n_infeasible = 0;
  double mean_postinv_nmse_db = 0.0;
  double mean_lin_nmse_db = 0.0;
  double mean_no_dpd_nmse_db = 0.0;
  double min_lin_nmse_db = 0.0;
  double max_lin_nmse_db = 0.0;
};

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows);
std::string summary_csv(const std::vector<SweepSummary>& summary);
/// Whitespace-separated mirror for gnuplot: one block per (family, preset).
std::string summary_dat(const std::vector<SweepSummary>& summary);

/// Per (family, preset): does mean linearization NMSE at the largest
/// parameter count stay within `tolerance_db` of the smallest count's?
struct MonotonicityFlag {
  ModelFamily family = ModelFamily::mpm;
  std::string preset;
  std::size_t smallest_params = 0;
  std::size_t largest_params = 0;
  double lin_at_smallest = 0.0;
  double lin_at_largest = 0.0;
  bool monotone = true;
};

std::vector<MonotonicityFlag> monotonicity(const std::vector<SweepSummary>& summary, double tolerance_db = 0.5);
std::string monotonicity_csv(const std::vector<MonotonicityFlag>& flags);

}  // namespace dpdlab

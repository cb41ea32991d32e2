#pragma once
// Run configuration in the structured text format. Every section is
// optional; omitted keys keep their defaults.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dpdlab/ila.hpp"
#include "dpdlab/pa_sim.hpp"
#include "dpdlab/sweep.hpp"
#include "dpdlab/training.hpp"

namespace dpdlab {

struct SignalConfig {
  std::uint32_t seed = 1;
  std::size_t n_samples = 65536;
  double bandwidth_fraction = 0.25;
};

struct RunConfig {
  PaConfig pa = preset(DistortionLevel::low);
  SignalConfig signal;
  ModelSpec model;
  TrainConfig train;
  IlaOptions ila;
  SweepSettings sweep;
  std::vector<PaConfig> sweep_presets{preset(DistortionLevel::low), preset(DistortionLevel::high)};
};

/// Throws FormatError naming the line (and key) on syntax errors, unknown
/// sections or keys, and type mismatches.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// `[pa]` section with rho, sigma, l_pa, k_pa, drive_db, a_sat,
/// feedback_snr_db (`none` for a disabled limiter or noiseless feedback).
std::string pa_to_text(const PaConfig& pa);

/// Copies signal/train/ila sections into the sweep settings.
SweepSettings effective_sweep(const RunConfig& cfg);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace dpdlab

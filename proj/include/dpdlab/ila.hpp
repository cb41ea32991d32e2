#pragma once
// Indirect learning: fit a postinverse on (normalized PA output -> PA input),
// then deploy it in front of the amplifier and measure linearization.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dpdlab/agmpnn.hpp"
#include "dpdlab/architecture_search.hpp"
#include "dpdlab/mpm.hpp"
#include "dpdlab/pa_sim.hpp"
#include "dpdlab/rvftdnn.hpp"
#include "dpdlab/training.hpp"

namespace dpdlab {

enum class ModelFamily { mpm, agmpnn, rvftdnn };

std::string_view family_name(ModelFamily family) noexcept;
ModelFamily parse_family(std::string_view text);

struct ModelSpec {
  ModelFamily family = ModelFamily::mpm;
  TapWindow window{3, 0};
  std::size_t k_orders = 4;     // mpm, agmpnn
  std::size_t m_experts = 3;    // agmpnn
  std::size_t n1 = 16;          // rvftdnn
  std::size_t n2 = 16;          // rvftdnn
  bool warm_start = true;       // agmpnn: start every expert from the LS-MPM
  std::optional<double> ridge;  // LS fits; nullopt = default ridge
  std::uint32_t model_seed = 1;
};

using DpdModel = std::variant<MpmCoefficients, AgmpnnModel, RvftdnnModel>;

ModelFamily family_of(const DpdModel& model) noexcept;
TapWindow window_of(const DpdModel& model) noexcept;
ComplexSequence apply_dpd(const DpdModel& model, const ComplexSequence& x);
std::size_t params_actual(const DpdModel& model) noexcept;
/// AGMPNN reports the published complexity formula; the others their
/// actual parameter count.
std::size_t params_formula(const DpdModel& model) noexcept;

/// Samples whose full tap window lies inside a length-n sequence.
SampleRange usable_range(std::size_t n, TapWindow window);

/// T = 1, K = 1, lambda = 1.
MpmCoefficients identity_dpd();

struct IlaOptions {
  std::size_t max_lag = 8;
  std::uint32_t noise_seed = 1001;
  bool feedback_noise = true;  // add receiver noise to the observation used for fitting
  std::size_t iterations = 1;
  // Choose between candidate compensators by their linearization on the
  // fitting waveform, observed through the feedback receiver.
  bool deploy_select = true;
};

struct IlaSeeds {
  std::uint32_t fit_signal = 0;
  std::uint32_t eval_signal = 0;
  std::uint32_t noise = 0;
  std::uint32_t model = 0;
};

struct IlaReport {
  ModelFamily family = ModelFamily::mpm;
  std::string preset;
  std::size_t taps = 0;
  std::size_t k_orders = 0;
  std::size_t m_experts = 0;
  std::size_t params_formula = 0;
  std::size_t params_actual = 0;
  double postinverse_nmse_db = 0.0;
  double linearization_nmse_db = 0.0;
  double no_dpd_nmse_db = 0.0;
  cplx gain_fit{1.0, 0.0};
  cplx gain_eval{1.0, 0.0};
  long fit_delay = 0;
  std::optional<double> warm_start_postinverse_nmse_db;
  bool improved = true;  // linearization <= no-DPD
  std::optional<double> fit_linearization_nmse_db;  // selection figure on the fitting waveform
  bool fell_back_to_warm_start = false;
  IlaSeeds seeds;
};

/// Postinverse training data: PA output aligned and divided by its gain.
struct PostinverseData {
  std::vector<cplx> input;
  std::vector<cplx> target;
  cplx gain{1.0, 0.0};
  long delay = 0;
};

PostinverseData prepare_postinverse(const PaConfig& pa, const ComplexSequence& phi, const IlaOptions& options,
                                    std::uint32_t noise_seed);

struct IlaFit {
  DpdModel model;
  IlaReport report;
  std::optional<TrainHistory> history;
  std::optional<MpmCoefficients> warm_start;
  std::optional<SearchResult> search;
};

/// Fits `spec` mapping `input` to `target` (already aligned) on the training
/// segments; LS families fit in closed form, the others train with `cfg`.
/// report.postinverse_nmse_db is measured on the validation segments.
IlaFit fit_postinverse(std::span<const cplx> input, std::span<const cplx> target, const ModelSpec& spec,
                       const TrainConfig& cfg);

/// Linearization NMSE of `model` deployed on the fitting waveform `chi`, with
/// the PA output observed through the feedback receiver (noise seed
/// options.noise_seed + options.iterations, distinct from the fitting
/// observations).
double feedback_linearization_db(const PaConfig& pa, const DpdModel& model, const ComplexSequence& chi,
                                 const IlaOptions& options);

/// Fits a postinverse of the requested family. Postinverse NMSE is measured
/// on the held-out (validation) segments. A warm-started AGMPNN that
/// linearizes the fitting waveform worse than its LS-MPM source is replaced
/// by the MPM-equivalent AGMPNN when options.deploy_select is set.
IlaFit ila_fit(const PaConfig& pa, const ComplexSequence& chi, const ModelSpec& spec, const TrainConfig& train_cfg,
               const IlaOptions& options = {});

/// RVFTDNN variant whose widths come from an architecture search.
IlaFit ila_fit_searched(const PaConfig& pa, const ComplexSequence& chi, TapWindow window, std::size_t budget_lo,
                        std::size_t budget_hi, const std::vector<WidthPair>& grid, const TrainConfig& train_cfg,
                        std::uint32_t model_seed, const IlaOptions& options = {});

/// Deploys the model as predistorter on a fresh waveform through the
/// noiseless PA and fills the linearization fields of `report`.
IlaReport ila_deploy_eval(const PaConfig& pa, const DpdModel& model, const ComplexSequence& chi_fresh,
                          IlaReport report = {});

}  // namespace dpdlab

#include "dpdlab/architecture_search.hpp"

#include <tuple>

namespace dpdlab {

std::vector<WidthPair> default_search_grid() {
  std::vector<WidthPair> grid;
  for (std::size_t n1 = 8; n1 <= 20; ++n1) {
    for (std::size_t n2 = 8; n2 <= 20; ++n2) grid.emplace_back(n1, n2);
  }
  return grid;
}

std::vector<WidthPair> feasible_grid(std::size_t taps, std::size_t budget_lo, std::size_t budget_hi,
                                     const std::vector<WidthPair>& grid) {
  std::vector<WidthPair> out;
  for (const auto& [n1, n2] : grid) {
    const std::size_t count = rvftdnn_param_count(taps, n1, n2);
    if (count >= budget_lo && count <= budget_hi) out.emplace_back(n1, n2);
  }
  return out;
}

SearchResult architecture_search(TapWindow window, std::size_t budget_lo, std::size_t budget_hi, const Dataset& data,
                                 const std::vector<WidthPair>& grid, const TrainConfig& cfg,
                                 std::uint32_t model_seed) {
  if (grid.empty()) throw ArgumentError("architecture_search: empty search grid");
  const auto feasible = feasible_grid(window.total(), budget_lo, budget_hi, grid);
  if (feasible.empty()) {
    throw ArgumentError("architecture_search: no grid point has a parameter count within [" +
                        std::to_string(budget_lo) + ", " + std::to_string(budget_hi) + "]");
  }

  SearchResult best;
  bool have_best = false;
  for (const auto& [n1, n2] : feasible) {
    RvftdnnModel model = init_rvftdnn(window, n1, n2, model_seed);
    TrainHistory history = train(model, data, cfg);
    const double val = history.best_val_nmse_db();
    const std::size_t count = rvftdnn_param_count(window.total(), n1, n2);
    best.evaluated.push_back({n1, n2, count, val});

    const auto key = std::make_tuple(val, count, n1, n2);
    const auto best_key =
        std::make_tuple(best.val_nmse_db, rvftdnn_param_count(window.total(), best.n1, best.n2), best.n1, best.n2);
    if (!have_best || key < best_key) {
      best.n1 = n1;
      best.n2 = n2;
      best.val_nmse_db = val;
      best.model = std::move(model);
      best.history = std::move(history);
      have_best = true;
    }
  }
  return best;
}

}  // namespace dpdlab

#pragma once
// Budget-constrained exhaustive search over RVFTDNN hidden widths.

#include <cstdint>
#include <utility>
#include <vector>

#include "dpdlab/rvftdnn.hpp"
#include "dpdlab/training.hpp"

namespace dpdlab {

using WidthPair = std::pair<std::size_t, std::size_t>;

struct SearchCandidate {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t params = 0;
  double val_nmse_db = 0.0;
};

struct SearchResult {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double val_nmse_db = 0.0;
  RvftdnnModel model;
  TrainHistory history;
  std::vector<SearchCandidate> evaluated;  // grid order
};

/// n1, n2 in {8, ..., 20}.
std::vector<WidthPair> default_search_grid();

/// Grid points whose parameter count lies in [budget_lo, budget_hi].
std::vector<WidthPair> feasible_grid(std::size_t taps, std::size_t budget_lo, std::size_t budget_hi,
                                     const std::vector<WidthPair>& grid);

/// Trains every feasible grid point and keeps the best validation NMSE; ties
/// go to the smaller parameter count, then the lexicographically smaller
/// (n1, n2). Throws ArgumentError when nothing in the grid fits the budget.
SearchResult architecture_search(TapWindow window, std::size_t budget_lo, std::size_t budget_hi, const Dataset& data,
                                 const std::vector<WidthPair>& grid, const TrainConfig& cfg, std::uint32_t model_seed);

}  // namespace dpdlab

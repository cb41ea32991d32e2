#pragma once
// Complex linear least squares by Householder QR.

#include <cstddef>
#include <span>
#include <vector>

#include "dpdlab/signal.hpp"

namespace dpdlab {

/// Dense column-major complex matrix.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  cplx& operator()(std::size_t r, std::size_t c) noexcept { return data_[c * rows_ + r]; }
  cplx operator()(std::size_t r, std::size_t c) const noexcept { return data_[c * rows_ + r]; }

  std::span<cplx> col(std::size_t c) noexcept { return {data_.data() + c * rows_, rows_}; }
  std::span<const cplx> col(std::size_t c) const noexcept { return {data_.data() + c * rows_, rows_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Minimizes |A x - b|^2 + ridge |x|^2, i.e. solves
/// (A^H A + ridge I) x = A^H b, by factorizing [A; sqrt(ridge) I].
/// With ridge == 0 a collapsed pivot (column numerically inside the span of
/// the preceding ones) raises ConditioningError listing every such column.
std::vector<cplx> solve_least_squares(const CMatrix& a, std::span<const cplx> b, double ridge);

}  // namespace dpdlab

#include "dpdlab/lstsq.hpp"

#include <cmath>
#include <string>

#include "dpdlab/errors.hpp"
#include "dpdlab/simd/kernels.hpp"

namespace dpdlab {
namespace {

// Relative size below which a pivot counts as collapsed.
constexpr double kPivotTolerance = 1e-11;

}  // namespace

std::vector<cplx> solve_least_squares(const CMatrix& a, std::span<const cplx> b, double ridge) {
  const std::size_t m = a.rows();
  const std::size_t p = a.cols();
  if (p == 0 || m == 0) throw ArgumentError("least squares: empty system");
  if (b.size() != m) throw ArgumentError("least squares: right-hand side length does not match row count");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ArgumentError("least squares: ridge must be finite and >= 0");
  if (ridge == 0.0 && m < p) throw ArgumentError("least squares: fewer rows than columns");

  // Working copy, augmented with sqrt(ridge) I when regularized.
  const std::size_t rows = ridge > 0.0 ? m + p : m;
  CMatrix w(rows, p);
  std::vector<double> col_norm(p, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    auto src = a.col(c);
    auto dst = w.col(c);
    std::copy(src.begin(), src.end(), dst.begin());
    if (ridge > 0.0) dst[m + c] = std::sqrt(ridge);
    col_norm[c] = std::sqrt(simd::dotc(dst, dst).real());
  }
  std::vector<cplx> rhs(rows, cplx{0.0, 0.0});
  std::copy(b.begin(), b.end(), rhs.begin());

  std::vector<cplx> diag(p);
  std::vector<std::size_t> collapsed;
  std::vector<cplx> v(rows);

  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t len = rows - j;
    std::span<cplx> x = w.col(j).subspan(j);
    const double norm = std::sqrt(simd::dotc(x, x).real());
    if (norm <= kPivotTolerance * col_norm[j] || col_norm[j] == 0.0) {
      collapsed.push_back(j);
      diag[j] = cplx{0.0, 0.0};
      continue;
    }
    const double x0_abs = std::abs(x[0]);
    const cplx phase = x0_abs > 0.0 ? x[0] / x0_abs : cplx{1.0, 0.0};
    const cplx alpha = -phase * norm;

    std::span<cplx> vj(v.data(), len);
    std::copy(x.begin(), x.end(), vj.begin());
    vj[0] -= alpha;
    const double vv = 2.0 * norm * (norm + x0_abs);

    for (std::size_t c = j + 1; c < p; ++c) {
      std::span<cplx> col = w.col(c).subspan(j);
      const cplx s = simd::dotc(vj, col);
      simd::axpy(-2.0 * s / vv, std::span<const cplx>(vj), col);
    }
    std::span<cplx> r = std::span<cplx>(rhs).subspan(j);
    const cplx s = simd::dotc(vj, r);
    simd::axpy(-2.0 * s / vv, std::span<const cplx>(vj), r);
    diag[j] = alpha;
  }

  if (!collapsed.empty()) {
    std::string cols;
    for (std::size_t c : collapsed) cols += (cols.empty() ? "" : ", ") + std::to_string(c);
    throw ConditioningError("least squares: normal matrix is singular; dependent columns {" + cols + "}",
                            std::move(collapsed));
  }

  // Back substitution on R x = Q^H b. Off-diagonal R entries live in w.
  std::vector<cplx> x(p);
  for (std::size_t jj = p; jj-- > 0;) {
    cplx acc = rhs[jj];
    for (std::size_t c = jj + 1; c < p; ++c) acc -= w(jj, c) * x[c];
    x[jj] = acc / diag[jj];
  }
  return x;
}

}  // namespace dpdlab

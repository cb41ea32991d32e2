#pragma once
// Memory polynomial model (MPM) and its amplitude-offset generalization
// (AOMPM): basis construction, least-squares fitting and prediction.
//
// Basis element for tap l and order k with amplitude offset b:
//   v_l * rect(|v_l| + b)^(2k),   rect(a) = max(0, a)
// where v_l is the l-th entry of the sample's tap window. b = 0 is the
// classical memory polynomial.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpdlab/lstsq.hpp"
#include "dpdlab/signal.hpp"

namespace dpdlab {

struct MpmSpec {
  TapWindow window;
  std::size_t k_orders = 1;  // k = 0 .. k_orders-1
  double offset_b = 0.0;

  std::size_t taps() const noexcept { return window.total(); }
  std::size_t columns() const noexcept { return taps() * k_orders; }
  std::size_t column_index(std::size_t l, std::size_t k) const noexcept { return l * k_orders + k; }
  void validate() const;

  friend bool operator==(const MpmSpec&, const MpmSpec&) = default;
};

struct MpmCoefficients {
  MpmSpec spec;
  std::vector<cplx> lambda;  // column_index(l, k) order

  cplx at(std::size_t l, std::size_t k) const { return lambda[spec.column_index(l, k)]; }
  void validate() const;

  /// Number of real parameters (two per complex coefficient).
  std::size_t num_params() const noexcept { return 2 * lambda.size(); }
};

/// Rows are samples, columns are (l, k) basis elements.
struct BasisMatrix {
  MpmSpec spec;
  CMatrix values;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }
};

/// Fills `out[l*K + k]` with the basis elements of one tap window.
void basis_row(std::span<const cplx> taps, std::size_t k_orders, double offset_b, std::span<cplx> out) noexcept;

BasisMatrix build_basis(std::span<const cplx> psi, const MpmSpec& spec, std::span<const SampleRange> ranges);
BasisMatrix build_basis(std::span<const cplx> psi, const MpmSpec& spec, SampleRange range);

/// Ridge used when the caller passes no explicit value:
/// 1e-10 * mean diagonal of Psi^H Psi.
double default_ridge(const BasisMatrix& basis);

/// Least-squares coefficients for targets aligned with the basis rows.
/// `ridge` = nullopt selects default_ridge(); 0 requests the plain LS solution.
MpmCoefficients ls_fit(const BasisMatrix& basis, std::span<const cplx> targets,
                       std::optional<double> ridge = std::nullopt);

/// Targets gathered from `phi` over the same ranges used for build_basis.
std::vector<cplx> gather(std::span<const cplx> phi, std::span<const SampleRange> ranges);

ComplexSequence mpm_predict(const MpmCoefficients& coeffs, const ComplexSequence& psi);

/// Prediction for the samples of `range` only, written to `out`.
void mpm_predict_range(const MpmCoefficients& coeffs, std::span<const cplx> psi, SampleRange range,
                       std::span<cplx> out);

/// Human-readable (l, k) labels, used in conditioning diagnostics.
std::string describe_columns(const MpmSpec& spec, std::span<const std::size_t> columns);

}  // namespace dpdlab

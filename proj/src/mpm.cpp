#include "dpdlab/mpm.hpp"

#include <algorithm>
#include <cmath>

#include "dpdlab/errors.hpp"
#include "dpdlab/simd/kernels.hpp"

namespace dpdlab {

void MpmSpec::validate() const {
  if (k_orders < 1) throw ArgumentError("MpmSpec: k_orders must be at least 1");
  if (!std::isfinite(offset_b)) throw ArgumentError("MpmSpec: offset must be finite");
}

void MpmCoefficients::validate() const {
  spec.validate();
  if (lambda.size() != spec.columns()) throw ArgumentError("MpmCoefficients: coefficient count does not match spec");
  for (const cplx& v : lambda) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw ArgumentError("MpmCoefficients: non-finite entry");
  }
}

void basis_row(std::span<const cplx> taps, std::size_t k_orders, double offset_b, std::span<cplx> out) noexcept {
  for (std::size_t l = 0; l < taps.size(); ++l) {
    const cplx v = taps[l];
    const double r = std::max(0.0, std::abs(v) + offset_b);
    const double r2 = r * r;
    double p = 1.0;
    cplx* row = out.data() + l * k_orders;
    for (std::size_t k = 0; k < k_orders; ++k) {
      row[k] = v * p;
      p *= r2;
    }
  }
}

BasisMatrix build_basis(std::span<const cplx> psi, const MpmSpec& spec, std::span<const SampleRange> ranges) {
  spec.validate();
  std::size_t rows = 0;
  for (const SampleRange& r : ranges) {
    if (r.end > psi.size() || r.begin > r.end) throw ArgumentError("build_basis: sample range outside the sequence");
    rows += r.size();
  }
  if (rows == 0) throw ArgumentError("build_basis: empty sample range");

  BasisMatrix basis{spec, CMatrix(rows, spec.columns())};
  std::vector<cplx> taps(spec.taps());
  std::vector<cplx> row(spec.columns());
  std::size_t i = 0;
  for (const SampleRange& r : ranges) {
    for (std::size_t n = r.begin; n < r.end; ++n, ++i) {
      window_into(psi, n, spec.window, taps);
      basis_row(taps, spec.k_orders, spec.offset_b, row);
      for (std::size_t c = 0; c < row.size(); ++c) basis.values(i, c) = row[c];
    }
  }
  return basis;
}

BasisMatrix build_basis(std::span<const cplx> psi, const MpmSpec& spec, SampleRange range) {
  return build_basis(psi, spec, std::span<const SampleRange>(&range, 1));
}

double default_ridge(const BasisMatrix& basis) {
  double trace = 0.0;
  for (std::size_t c = 0; c < basis.cols(); ++c) trace += simd::dotc(basis.values.col(c), basis.values.col(c)).real();
  return 1e-10 * trace / static_cast<double>(basis.cols());
}

std::string describe_columns(const MpmSpec& spec, std::span<const std::size_t> columns) {
  std::string out;
  for (std::size_t c : columns) {
    if (!out.empty()) out += ", ";
    out += "(l=" + std::to_string(c / spec.k_orders) + ",k=" + std::to_string(c % spec.k_orders) + ")";
  }
  return out;
}

MpmCoefficients ls_fit(const BasisMatrix& basis, std::span<const cplx> targets, std::optional<double> ridge) {
  if (targets.size() != basis.rows()) throw ArgumentError("ls_fit: target length does not match basis rows");
  if (basis.rows() < basis.cols()) throw ArgumentError("ls_fit: fewer samples than basis columns");
  const double lambda_reg = ridge ? *ridge : default_ridge(basis);
  try {
    return MpmCoefficients{basis.spec, solve_least_squares(basis.values, targets, lambda_reg)};
  } catch (const ConditioningError& e) {
    throw ConditioningError("ls_fit: singular normal matrix; dependent basis columns " +
                                describe_columns(basis.spec, e.columns()),
                            e.columns());
  }
}

std::vector<cplx> gather(std::span<const cplx> phi, std::span<const SampleRange> ranges) {
  std::vector<cplx> out;
  for (const SampleRange& r : ranges) {
    if (r.end > phi.size()) throw ArgumentError("gather: sample range outside the sequence");
    out.insert(out.end(), phi.begin() + static_cast<long>(r.begin), phi.begin() + static_cast<long>(r.end));
  }
  return out;
}

void mpm_predict_range(const MpmCoefficients& coeffs, std::span<const cplx> psi, SampleRange range,
                       std::span<cplx> out) {
  coeffs.validate();
  if (range.end > psi.size() || out.size() < range.size()) throw ArgumentError("mpm_predict: bad range");
  std::vector<cplx> taps(coeffs.spec.taps());
  std::vector<cplx> row(coeffs.spec.columns());
  for (std::size_t n = range.begin; n < range.end; ++n) {
    window_into(psi, n, coeffs.spec.window, taps);
    basis_row(taps, coeffs.spec.k_orders, coeffs.spec.offset_b, row);
    out[n - range.begin] = simd::dotu(row, coeffs.lambda);
  }
}

ComplexSequence mpm_predict(const MpmCoefficients& coeffs, const ComplexSequence& psi) {
  std::vector<cplx> out(psi.size());
  mpm_predict_range(coeffs, psi.samples(), SampleRange{0, psi.size()}, out);
  return ComplexSequence(std::move(out), psi.sample_rate_hint());
}

}  // namespace dpdlab

#pragma once
// Data-parallel inner loops shared by the least-squares solver, the memory
// polynomial evaluators and the dense baseline. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2/FMA variant picked at
// runtime from CPUID. Complex arrays use the std::complex<double> layout
// (interleaved re, im).

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace dpdlab::simd {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  // sum x[i] * y[i]
  double (*ddot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*daxpy)(double a, const double* x, double* y, std::size_t n);
  // sum x[i] * y[i]
  cplx (*cdotu)(const cplx* x, const cplx* y, std::size_t n);
  // sum conj(x[i]) * y[i]
  cplx (*cdotc)(const cplx* x, const cplx* y, std::size_t n);
  // y[i] += a * x[i]
  void (*caxpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
const KernelTable* avx2_kernels() noexcept;  // nullptr when not compiled in

bool isa_supported(Isa isa) noexcept;
std::string_view isa_name(Isa isa) noexcept;

/// Table for a specific instruction set. Throws ArgumentError when the host
/// or the build lacks it.
const KernelTable& kernels_for(Isa isa);

/// The process-wide active table. Defaults to the best supported ISA.
const KernelTable& active() noexcept;

/// Overrides the active table (tests and benchmarks). Not thread-safe with
/// respect to concurrent kernel calls.
void select_isa(Isa isa);

inline double dot(std::span<const double> x, std::span<const double> y) noexcept {
  return active().ddot(x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  active().daxpy(a, x.data(), y.data(), x.size());
}

inline cplx dotu(std::span<const cplx> x, std::span<const cplx> y) noexcept {
  return active().cdotu(x.data(), y.data(), x.size());
}

inline cplx dotc(std::span<const cplx> x, std::span<const cplx> y) noexcept {
  return active().cdotc(x.data(), y.data(), x.size());
}

inline void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y) noexcept {
  active().caxpy(a, x.data(), y.data(), x.size());
}

}  // namespace dpdlab::simd

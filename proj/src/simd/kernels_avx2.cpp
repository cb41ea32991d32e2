#include "dpdlab/simd/kernels.hpp"

#if defined(DPDLAB_HAVE_AVX2)

#include <immintrin.h>

// Functions carry target attributes instead of the whole translation unit
// being built with -mavx2, so no AVX2 code leaks into inline functions that
// the scalar path could pick up at link time.
#define DPDLAB_AVX2 __attribute__((target("avx2,fma")))

namespace dpdlab::simd {
namespace {

DPDLAB_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

DPDLAB_AVX2 double ddot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

DPDLAB_AVX2 void daxpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

// Two complex values per register: [r0 i0 r1 i1]. `same` accumulates
// (xr*yr, xi*yi) and `cross` accumulates (xr*yi, xi*yr); the real and
// imaginary parts are combined once at the end.
template <bool Conj>
DPDLAB_AVX2 cplx cdot_avx2(const cplx* x, const cplx* y, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  const double* yp = reinterpret_cast<const double*>(y);
  __m256d same = _mm256_setzero_pd();
  __m256d cross = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(xp + 2 * i);
    const __m256d vy = _mm256_loadu_pd(yp + 2 * i);
    const __m256d vy_sw = _mm256_permute_pd(vy, 0b0101);
    same = _mm256_fmadd_pd(vx, vy, same);
    cross = _mm256_fmadd_pd(vx, vy_sw, cross);
  }
  alignas(32) double s[4];
  alignas(32) double c[4];
  _mm256_store_pd(s, same);
  _mm256_store_pd(c, cross);
  double re, im;
  if constexpr (Conj) {
    re = (s[0] + s[2]) + (s[1] + s[3]);
    im = (c[0] + c[2]) - (c[1] + c[3]);
  } else {
    re = (s[0] + s[2]) - (s[1] + s[3]);
    im = (c[0] + c[2]) + (c[1] + c[3]);
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    if constexpr (Conj) {
      re += xr * yr + xi * yi;
      im += xr * yi - xi * yr;
    } else {
      re += xr * yr - xi * yi;
      im += xr * yi + xi * yr;
    }
  }
  return {re, im};
}

DPDLAB_AVX2 cplx cdotu_avx2(const cplx* x, const cplx* y, std::size_t n) {
  return cdot_avx2<false>(x, y, n);
}

DPDLAB_AVX2 cplx cdotc_avx2(const cplx* x, const cplx* y, std::size_t n) {
  return cdot_avx2<true>(x, y, n);
}

DPDLAB_AVX2 void caxpy_avx2(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  double* yp = reinterpret_cast<double*>(y);
  const __m256d ar = _mm256_set1_pd(a.real());
  // (-ai, +ai) so that ai * swap(x) yields (-ai*xi, ai*xr)
  const __m256d ai = _mm256_setr_pd(-a.imag(), a.imag(), -a.imag(), a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(xp + 2 * i);
    const __m256d vx_sw = _mm256_permute_pd(vx, 0b0101);
    __m256d vy = _mm256_loadu_pd(yp + 2 * i);
    vy = _mm256_add_pd(vy, _mm256_fmadd_pd(ar, vx, _mm256_mul_pd(ai, vx_sw)));
    _mm256_storeu_pd(yp + 2 * i, vy);
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + (a.real() * xr - a.imag() * xi),
            y[i].imag() + (a.real() * xi + a.imag() * xr)};
  }
}

constexpr KernelTable kAvx2{Isa::avx2, ddot_avx2, daxpy_avx2, cdotu_avx2, cdotc_avx2, caxpy_avx2};

}  // namespace

const KernelTable* avx2_kernels() noexcept { return &kAvx2; }

}  // namespace dpdlab::simd

#else

namespace dpdlab::simd {
const KernelTable* avx2_kernels() noexcept { return nullptr; }
}  // namespace dpdlab::simd

#endif

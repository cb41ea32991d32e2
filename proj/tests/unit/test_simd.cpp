#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dpdlab/errors.hpp"
#include "dpdlab/lstsq.hpp"
#include "dpdlab/mpm.hpp"
#include "dpdlab/simd/kernels.hpp"
#include "test_util.hpp"

using namespace dpdlab;
using simd::Isa;
using simd::KernelTable;

namespace {

std::vector<double> reals(std::uint32_t seed, std::size_t n) {
  RandomSource rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

// Naive long-double references, independent of both kernel tables.
long double ref_ddot(const std::vector<double>& x, const std::vector<double>& y) {
  long double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<long double>(x[i]) * y[i];
  return s;
}

std::complex<long double> ref_cdot(const std::vector<cplx>& x, const std::vector<cplx>& y, bool conj) {
  std::complex<long double> s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::complex<long double> a(x[i].real(), conj ? -x[i].imag() : x[i].imag());
    s += a * std::complex<long double>(y[i].real(), y[i].imag());
  }
  return s;
}

class KernelEquivalence : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
    if (!simd::isa_supported(Isa::avx2)) GTEST_SKIP() << "AVX2 not available on this host/build";
  }
  const KernelTable& scalar() { return simd::scalar_kernels(); }
  const KernelTable& avx2() { return simd::kernels_for(Isa::avx2); }
};

constexpr double kTol = 1e-13;

}  // namespace

TEST_P(KernelEquivalence, Ddot) {
  const std::size_t n = GetParam();
  const auto x = reals(1 + n, n), y = reals(1000 + n, n);
  const long double ref = ref_ddot(x, y);
  const double scale = std::sqrt(static_cast<double>(n) + 1.0);
  EXPECT_NEAR(scalar().ddot(x.data(), y.data(), n), static_cast<double>(ref), kTol * scale);
  EXPECT_NEAR(avx2().ddot(x.data(), y.data(), n), static_cast<double>(ref), kTol * scale);
}

TEST_P(KernelEquivalence, Daxpy) {
  const std::size_t n = GetParam();
  const auto x = reals(2 + n, n);
  auto y1 = reals(2000 + n, n), y2 = y1;
  scalar().daxpy(-0.37, x.data(), y1.data(), n);
  avx2().daxpy(-0.37, x.data(), y2.data(), n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-15) << i;
}

TEST_P(KernelEquivalence, ComplexDots) {
  const std::size_t n = GetParam();
  const auto x = testutil::random_samples(3 + n, n), y = testutil::random_samples(3000 + n, n);
  const double scale = std::sqrt(static_cast<double>(n) + 1.0);
  for (bool conj : {false, true}) {
    const auto ref = ref_cdot(x, y, conj);
    const cplx r(static_cast<double>(ref.real()), static_cast<double>(ref.imag()));
    const cplx s = conj ? scalar().cdotc(x.data(), y.data(), n) : scalar().cdotu(x.data(), y.data(), n);
    const cplx v = conj ? avx2().cdotc(x.data(), y.data(), n) : avx2().cdotu(x.data(), y.data(), n);
    EXPECT_LE(std::abs(s - r), kTol * scale) << "conj=" << conj;
    EXPECT_LE(std::abs(v - r), kTol * scale) << "conj=" << conj;
  }
}

TEST_P(KernelEquivalence, Caxpy) {
  const std::size_t n = GetParam();
  const auto x = testutil::random_samples(4 + n, n);
  auto y1 = testutil::random_samples(4000 + n, n), y2 = y1;
  const cplx a{0.8, -1.3};
  scalar().caxpy(a, x.data(), y1.data(), n);
  avx2().caxpy(a, x.data(), y2.data(), n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_LE(std::abs(y1[i] - y2[i]), 1e-14) << i;
}

// Lengths straddle the 4-wide and 8-wide unrolled bodies and their tails.
INSTANTIATE_TEST_SUITE_P(Lengths, KernelEquivalence,
                         ::testing::Values(0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 1000, 4099));

TEST(KernelDispatch, ScalarAlwaysAvailable) {
  EXPECT_TRUE(simd::isa_supported(Isa::scalar));
  EXPECT_EQ(simd::kernels_for(Isa::scalar).isa, Isa::scalar);
  EXPECT_EQ(simd::isa_name(Isa::scalar), "scalar");
  EXPECT_EQ(simd::isa_name(Isa::avx2), "avx2");
}

TEST(KernelDispatch, SelectSwitchesActiveTable) {
  const Isa before = simd::active().isa;
  simd::select_isa(Isa::scalar);
  EXPECT_EQ(simd::active().isa, Isa::scalar);
  if (simd::isa_supported(Isa::avx2)) {
    simd::select_isa(Isa::avx2);
    EXPECT_EQ(simd::active().isa, Isa::avx2);
  } else {
    EXPECT_THROW(simd::select_isa(Isa::avx2), ArgumentError);
  }
  simd::select_isa(before);
}

TEST(KernelDispatch, DefaultIsBestSupported) {
  const Isa expected = simd::isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
  EXPECT_EQ(simd::active().isa, expected);
}

// End to end: an LS fit and prediction agree across kernel tables.
TEST(KernelDispatch, LsFitAgreesAcrossIsas) {
  if (!simd::isa_supported(Isa::avx2)) GTEST_SKIP();
  const auto psi = testutil::random_samples(77, 2048, 0.5);
  const auto target = testutil::random_samples(78, 2048, 0.5);
  const MpmSpec spec{TapWindow{3, 0}, 3, 0.0};
  const SampleRange range{3, 2048};
  auto run = [&](Isa isa) {
    simd::select_isa(isa);
    const auto c = ls_fit(build_basis(psi, spec, range), gather(target, {&range, 1}), 0.0);
    return c.lambda;
  };
  const Isa before = simd::active().isa;
  const auto a = run(Isa::scalar);
  const auto b = run(Isa::avx2);
  simd::select_isa(before);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(testutil::rel_diff(a[i], b[i]), 1e-10) << i;
}

#include <atomic>
#include <string>

#include "dpdlab/errors.hpp"
#include "dpdlab/simd/kernels.hpp"

namespace dpdlab::simd {
namespace {

bool host_has_avx2() noexcept {
#if defined(DPDLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* best_table() noexcept {
  if (avx2_kernels() != nullptr && host_has_avx2()) return avx2_kernels();
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() noexcept {
  static std::atomic<const KernelTable*> slot{best_table()};
  return slot;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return avx2_kernels() != nullptr && host_has_avx2();
  }
  return false;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw ArgumentError("instruction set '" + std::string(isa_name(isa)) +
                        "' is not available on this host/build");
  }
  return isa == Isa::avx2 ? *avx2_kernels() : scalar_kernels();
}

const KernelTable& active() noexcept { return *active_slot().load(std::memory_order_relaxed); }

void select_isa(Isa isa) { active_slot().store(&kernels_for(isa), std::memory_order_relaxed); }

}  // namespace dpdlab::simd

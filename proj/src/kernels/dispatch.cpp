#include "plas/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace plas::kernels {

#if !defined(PLAS_HAVE_AVX2_KERNEL)
namespace avx2 {
void squared_distances(std::span<const double* const>, std::span<const double>,
                       std::span<double>) {
  throw std::logic_error("AVX2 kernel not compiled in");
}
}  // namespace avx2
#endif

#if !defined(PLAS_HAVE_NEON_KERNEL)
namespace neon {
void squared_distances(std::span<const double* const>, std::span<const double>,
                       std::span<double>) {
  throw std::logic_error("NEON kernel not compiled in");
}
}  // namespace neon
#endif

namespace {

bool cpu_has_avx2() {
#if defined(PLAS_HAVE_AVX2_KERNEL) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa best_isa() {
  if (isa_supported(Isa::avx2)) return Isa::avx2;
  if (isa_supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return cpu_has_avx2();
    case Isa::neon:
#if defined(PLAS_HAVE_NEON_KERNEL)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() {
  if (const char* env = std::getenv("PLAS_SIMD")) {
    const std::string wanted(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (wanted == isa_name(isa) && isa_supported(isa)) return isa;
    }
  }
  return best_isa();
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("force_isa: " + std::string(isa_name(isa)) +
                                " is not supported on this CPU/build");
  }
  active().store(isa, std::memory_order_relaxed);
}

void squared_distances(std::span<const double* const> columns,
                       std::span<const double> query, std::span<double> out) {
  switch (active_isa()) {
    case Isa::avx2: return avx2::squared_distances(columns, query, out);
    case Isa::neon: return neon::squared_distances(columns, query, out);
    case Isa::scalar: break;
  }
  scalar::squared_distances(columns, query, out);
}

}  // namespace plas::kernels

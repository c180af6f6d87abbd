#include <atomic>
#include <cstdlib>
#include <string>

#include "mrsi/errors.hpp"
#include "mrsi/simd.hpp"

namespace mrsi::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(MRSI_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Backend>& active() noexcept {
  static std::atomic<Backend> backend{detect_backend()};
  return backend;
}

}  // namespace

bool backend_supported(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return cpu_has_avx2();
    case Backend::Neon:
#if defined(MRSI_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

Backend detect_backend() noexcept {
  if (const char* env = std::getenv("MRSI_SIMD")) {
    const std::string want(env);
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
      if (want == backend_name(b) && backend_supported(b)) return b;
    }
  }
  if (backend_supported(Backend::Avx2)) return Backend::Avx2;
  if (backend_supported(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

Backend active_backend() noexcept { return active().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_supported(b)) {
    throw InvalidArgument("SIMD backend '" + std::string(backend_name(b)) +
                          "' is not available on this build/CPU");
  }
  active().store(b, std::memory_order_relaxed);
}

const KernelTable& kernels_for(Backend b) {
  if (!backend_supported(b)) {
    throw InvalidArgument("SIMD backend '" + std::string(backend_name(b)) + "' is not available");
  }
  switch (b) {
#if defined(MRSI_HAVE_AVX2)
    case Backend::Avx2:
      return detail::avx2_table();
#endif
#if defined(MRSI_HAVE_NEON)
    case Backend::Neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

const KernelTable& kernels() noexcept {
  switch (active_backend()) {
#if defined(MRSI_HAVE_AVX2)
    case Backend::Avx2:
      return detail::avx2_table();
#endif
#if defined(MRSI_HAVE_NEON)
    case Backend::Neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

}  // namespace mrsi::simd

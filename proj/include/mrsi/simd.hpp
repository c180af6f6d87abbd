#pragma once

// Data-parallel inner loops shared by the forward model, the gridding
// reconstruction, the direct-DFT oracle and the spectral front end.
//
// Every kernel has a scalar reference implementation. Vector variants
// (AVX2+FMA on x86-64, NEON on AArch64) are selected once at startup from
// the CPU feature flags; the environment variable MRSI_SIMD=scalar|avx2|neon
// overrides the choice. Equivalence between the variants is covered by
// tests/unit/test_simd.cpp.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace mrsi::simd {

using cplx = std::complex<double>;

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  // sum_i a[i] * b[i]
  cplx (*dot)(const cplx* a, const cplx* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
  // y[i] += alpha * w[i], w real
  void (*axpy_real)(cplx alpha, const double* w, cplx* y, std::size_t n);
  // out[i] = sqrt(re^2 + im^2); bit-identical across backends
  void (*modulus)(const cplx* x, double* out, std::size_t n);
  // sum_i |x[i]|^2
  double (*energy)(const cplx* x, std::size_t n);
  // y[i] += a[i] * b[i]
  void (*mul_acc)(const cplx* a, const cplx* b, cplx* y, std::size_t n);
};

bool backend_supported(Backend b) noexcept;
std::string_view backend_name(Backend b) noexcept;

/// Best backend for this CPU, honoring MRSI_SIMD when set to a supported value.
Backend detect_backend() noexcept;

Backend active_backend() noexcept;
/// Throws mrsi::InvalidArgument when `b` is not compiled in or not supported.
void set_backend(Backend b);

const KernelTable& kernels_for(Backend b);
const KernelTable& kernels() noexcept;

inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  return kernels().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}
inline void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}
inline void axpy_real(cplx alpha, std::span<const double> w, std::span<cplx> y) {
  kernels().axpy_real(alpha, w.data(), y.data(), w.size() < y.size() ? w.size() : y.size());
}
inline void modulus(std::span<const cplx> x, std::span<double> out) {
  kernels().modulus(x.data(), out.data(), x.size() < out.size() ? x.size() : out.size());
}
inline double energy(std::span<const cplx> x) { return kernels().energy(x.data(), x.size()); }
inline void mul_acc(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> y) {
  std::size_t n = a.size() < b.size() ? a.size() : b.size();
  n = n < y.size() ? n : y.size();
  kernels().mul_acc(a.data(), b.data(), y.data(), n);
}

/// RAII override of the active backend, restored on scope exit.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b) : previous_(active_backend()) { set_backend(b); }
  ~ScopedBackend() { set_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

namespace detail {
const KernelTable& scalar_table() noexcept;
#if defined(MRSI_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif
#if defined(MRSI_HAVE_NEON)
const KernelTable& neon_table() noexcept;
#endif
}  // namespace detail

}  // namespace mrsi::simd

#include "mrsi/simd.hpp"

#include <cmath>

namespace mrsi::simd::detail {
namespace {

cplx dot_scalar(const cplx* a, const cplx* b, std::size_t n) {
  // Same accumulation split as the vector variants: four partial sums.
  double rr = 0.0, ii = 0.0, ri = 0.0, ir = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    rr += ar * br;
    ii += ai * bi;
    ri += ar * bi;
    ir += ai * br;
  }
  return {rr - ii, ri + ir};
}

void axpy_scalar(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const double ar = alpha.real(), ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + (ar * xr - ai * xi), y[i].imag() + (ar * xi + ai * xr)};
  }
}

void axpy_real_scalar(cplx alpha, const double* w, cplx* y, std::size_t n) {
  const double ar = alpha.real(), ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = {y[i].real() + ar * w[i], y[i].imag() + ai * w[i]};
  }
}

void modulus_scalar(const cplx* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = x[i].real(), im = x[i].imag();
    out[i] = std::sqrt(re * re + im * im);
  }
}

double energy_scalar(const cplx* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = x[i].real(), im = x[i].imag();
    acc += re * re + im * im;
  }
  return acc;
}

void mul_acc_scalar(const cplx* a, const cplx* b, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    y[i] = {y[i].real() + (ar * br - ai * bi), y[i].imag() + (ar * bi + ai * br)};
  }
}

constexpr KernelTable kScalar{dot_scalar,     axpy_scalar,   axpy_real_scalar,
                              modulus_scalar, energy_scalar, mul_acc_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace mrsi::simd::detail

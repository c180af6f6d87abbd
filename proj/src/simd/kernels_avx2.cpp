// AVX2 + FMA variants. This translation unit is the only one built with
// -mavx2 -mfma; nothing here may be called unless the dispatcher has
// confirmed CPU support.

#include "mrsi/simd.hpp"

#include <immintrin.h>

#include <cmath>

namespace mrsi::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Lanes hold [re0, im0, re1, im1]. Two accumulators: a*b lane-wise gives
// [ar*br, ai*bi, ...]; a*swap(b) gives [ar*bi, ai*br, ...].
cplx dot_avx2(const cplx* a, const cplx* b, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  __m256d acc_d0 = _mm256_setzero_pd(), acc_s0 = _mm256_setzero_pd();
  __m256d acc_d1 = _mm256_setzero_pd(), acc_s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va0 = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb0 = _mm256_loadu_pd(pb + 2 * i);
    const __m256d va1 = _mm256_loadu_pd(pa + 2 * i + 4);
    const __m256d vb1 = _mm256_loadu_pd(pb + 2 * i + 4);
    acc_d0 = _mm256_fmadd_pd(va0, vb0, acc_d0);
    acc_s0 = _mm256_fmadd_pd(va0, _mm256_permute_pd(vb0, 0b0101), acc_s0);
    acc_d1 = _mm256_fmadd_pd(va1, vb1, acc_d1);
    acc_s1 = _mm256_fmadd_pd(va1, _mm256_permute_pd(vb1, 0b0101), acc_s1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    acc_d0 = _mm256_fmadd_pd(va, vb, acc_d0);
    acc_s0 = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0b0101), acc_s0);
  }
  const __m256d d = _mm256_add_pd(acc_d0, acc_d1);
  const __m256d s = _mm256_add_pd(acc_s0, acc_s1);
  alignas(32) double dd[4], ss[4];
  _mm256_store_pd(dd, d);
  _mm256_store_pd(ss, s);
  double rr = dd[0] + dd[2], ii = dd[1] + dd[3];
  double ri = ss[0] + ss[2], ir = ss[1] + ss[3];
  for (; i < n; ++i) {
    rr += a[i].real() * b[i].real();
    ii += a[i].imag() * b[i].imag();
    ri += a[i].real() * b[i].imag();
    ir += a[i].imag() * b[i].real();
  }
  return {rr - ii, ri + ir};
}

void axpy_avx2(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  double* py = reinterpret_cast<double*>(y);
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(px + 2 * i);
    const __m256d t = _mm256_mul_pd(ai, _mm256_permute_pd(vx, 0b0101));
    // even lanes: ar*xr - ai*xi, odd lanes: ar*xi + ai*xr
    const __m256d prod = _mm256_fmaddsub_pd(ar, vx, t);
    _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), prod));
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + (alpha.real() * xr - alpha.imag() * xi),
            y[i].imag() + (alpha.real() * xi + alpha.imag() * xr)};
  }
}

void axpy_real_avx2(cplx alpha, const double* w, cplx* y, std::size_t n) {
  double* py = reinterpret_cast<double*>(y);
  const __m256d va = _mm256_setr_pd(alpha.real(), alpha.imag(), alpha.real(), alpha.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m128d w2 = _mm_loadu_pd(w + i);
    // [w0, w0, w1, w1]
    const __m256d wd = _mm256_permute4x64_pd(_mm256_castpd128_pd256(w2), 0b01010000);
    _mm256_storeu_pd(py + 2 * i, _mm256_fmadd_pd(va, wd, _mm256_loadu_pd(py + 2 * i)));
  }
  for (; i < n; ++i) {
    y[i] = {y[i].real() + alpha.real() * w[i], y[i].imag() + alpha.imag() * w[i]};
  }
}

// No FMA here: re*re + im*im must round exactly like the scalar kernel.
void modulus_avx2(const cplx* x, double* out, std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = _mm256_loadu_pd(px + 2 * i);
    const __m256d v1 = _mm256_loadu_pd(px + 2 * i + 4);
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
    // hadd yields [|x0|^2, |x2|^2, |x1|^2, |x3|^2]
    const __m256d ordered = _mm256_permute4x64_pd(h, 0b11011000);
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(ordered));
  }
  for (; i < n; ++i) {
    const double re = x[i].real(), im = x[i].imag();
    out[i] = std::sqrt(re * re + im * im);
  }
}

double energy_avx2(const cplx* x, std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = _mm256_loadu_pd(px + 2 * i);
    const __m256d v1 = _mm256_loadu_pd(px + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double re = x[i].real(), im = x[i].imag();
    acc += re * re + im * im;
  }
  return acc;
}

void mul_acc_avx2(const cplx* a, const cplx* b, cplx* y, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* py = reinterpret_cast<double*>(y);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    const __m256d are = _mm256_movedup_pd(va);        // [ar, ar, ...]
    const __m256d aim = _mm256_permute_pd(va, 0b1111);  // [ai, ai, ...]
    const __m256d t = _mm256_mul_pd(aim, _mm256_permute_pd(vb, 0b0101));
    const __m256d prod = _mm256_fmaddsub_pd(are, vb, t);
    _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), prod));
  }
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    y[i] = {y[i].real() + (ar * br - ai * bi), y[i].imag() + (ar * bi + ai * br)};
  }
}

constexpr KernelTable kAvx2{dot_avx2,     axpy_avx2,   axpy_real_avx2,
                            modulus_avx2, energy_avx2, mul_acc_avx2};

}  // namespace

const KernelTable& avx2_table() noexcept { return kAvx2; }

}  // namespace mrsi::simd::detail

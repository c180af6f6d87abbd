// NEON variants for AArch64 (float64x2_t holds one complex double).

#include "mrsi/simd.hpp"

#include <arm_neon.h>

#include <cmath>

namespace mrsi::simd::detail {
namespace {

cplx dot_neon(const cplx* a, const cplx* b, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  float64x2_t acc_d = vdupq_n_f64(0.0);  // [ar*br, ai*bi]
  float64x2_t acc_s = vdupq_n_f64(0.0);  // [ar*bi, ai*br]
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t va = vld1q_f64(pa + 2 * i);
    const float64x2_t vb = vld1q_f64(pb + 2 * i);
    acc_d = vfmaq_f64(acc_d, va, vb);
    acc_s = vfmaq_f64(acc_s, va, vextq_f64(vb, vb, 1));
  }
  return {vgetq_lane_f64(acc_d, 0) - vgetq_lane_f64(acc_d, 1),
          vgetq_lane_f64(acc_s, 0) + vgetq_lane_f64(acc_s, 1)};
}

void axpy_neon(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  double* py = reinterpret_cast<double*>(y);
  const float64x2_t ar = vdupq_n_f64(alpha.real());
  const double aiv[2] = {-alpha.imag(), alpha.imag()};
  const float64x2_t ai = vld1q_f64(aiv);
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t vx = vld1q_f64(px + 2 * i);
    float64x2_t vy = vld1q_f64(py + 2 * i);
    vy = vfmaq_f64(vy, ar, vx);
    vy = vfmaq_f64(vy, ai, vextq_f64(vx, vx, 1));
    vst1q_f64(py + 2 * i, vy);
  }
}

void axpy_real_neon(cplx alpha, const double* w, cplx* y, std::size_t n) {
  double* py = reinterpret_cast<double*>(y);
  const double av[2] = {alpha.real(), alpha.imag()};
  const float64x2_t va = vld1q_f64(av);
  for (std::size_t i = 0; i < n; ++i) {
    vst1q_f64(py + 2 * i, vfmaq_n_f64(vld1q_f64(py + 2 * i), va, w[i]));
  }
}

// No fused multiply-add: must round exactly like the scalar kernel.
void modulus_neon(const cplx* x, double* out, std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v0 = vld1q_f64(px + 2 * i);
    const float64x2_t v1 = vld1q_f64(px + 2 * i + 2);
    const float64x2_t s = vpaddq_f64(vmulq_f64(v0, v0), vmulq_f64(v1, v1));
    vst1q_f64(out + i, vsqrtq_f64(s));
  }
  for (; i < n; ++i) {
    const double re = x[i].real(), im = x[i].imag();
    out[i] = std::sqrt(re * re + im * im);
  }
}

double energy_neon(const cplx* x, std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  float64x2_t acc = vdupq_n_f64(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t v = vld1q_f64(px + 2 * i);
    acc = vfmaq_f64(acc, v, v);
  }
  return vaddvq_f64(acc);
}

void mul_acc_neon(const cplx* a, const cplx* b, cplx* y, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* py = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t vb = vld1q_f64(pb + 2 * i);
    const double ai_sign[2] = {-pa[2 * i + 1], pa[2 * i + 1]};
    float64x2_t vy = vld1q_f64(py + 2 * i);
    vy = vfmaq_n_f64(vy, vb, pa[2 * i]);
    vy = vfmaq_f64(vy, vld1q_f64(ai_sign), vextq_f64(vb, vb, 1));
    vst1q_f64(py + 2 * i, vy);
  }
}

constexpr KernelTable kNeon{dot_neon,     axpy_neon,   axpy_real_neon,
                            modulus_neon, energy_neon, mul_acc_neon};

}  // namespace

const KernelTable& neon_table() noexcept { return kNeon; }

}  // namespace mrsi::simd::detail

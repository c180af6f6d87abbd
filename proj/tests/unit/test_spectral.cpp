#include <cmath>
#include <vector>

#include "doctest.h"
#include "mrsi/errors.hpp"
#include "mrsi/phantom.hpp"
#include "mrsi/spectral.hpp"

using namespace mrsi;

namespace {

std::vector<double> times(std::size_t n, double dwell) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * dwell;
  return t;
}

std::size_t argmax(const std::vector<double>& v, std::size_t from = 0) {
  return static_cast<std::size_t>(std::max_element(v.begin() + static_cast<long>(from), v.end()) - v.begin());
}

// ppm of the largest amplitude inside [lo, hi]
double peak_ppm(const RegisteredSpectrum& s, double lo, double hi) {
  double best = -1.0, at = 0.0;
  for (std::size_t k = 0; k < s.amplitudes.size(); ++k) {
    if (s.axis.ppm[k] < lo || s.axis.ppm[k] > hi) continue;
    if (s.amplitudes[k] > best) {
      best = s.amplitudes[k];
      at = s.axis.ppm[k];
    }
  }
  return at;
}

}  // namespace

TEST_CASE("options validation") {
  SpectralOptions o;
  CHECK_NOTHROW(o.validate());
  o.zerofill = 3;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = {};
  o.lb_hz = -1.0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = {};
  o.tail_fraction = 0.0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
}

TEST_CASE("modulus spectrum of pure water registers at the reference") {
  const FieldConstants f;
  const auto t = times(1024, 0.5e-3);
  for (double b0 : {-37.0, 0.0, 12.5}) {
    for (double ph : {0.0, 2.1}) {
      std::vector<cplx> s(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) s[i] = 3.0 * std::polar(1.0, kTwoPi * b0 * t[i] + ph);
      SpectralOptions o;
      o.baseline_tail = false;
      const auto r = magnitude_fid_spectrum(s, 0.5e-3, o, f);
      CHECK(argmax(r.amplitudes) == 0);
      CHECK(r.axis.ppm[0] == doctest::Approx(4.7));
      CHECK(r.axis.freq_hz[0] == 0.0);
    }
  }
}

TEST_CASE("modulus spectrum axis and sizes") {
  const FieldConstants f;
  TissueParams p;
  p.water_amp = 1.0;
  const auto s = synth_voxel_fid(p, times(512, 0.5e-3), f);
  for (int zf : {1, 2, 4}) {
    SpectralOptions o;
    o.zerofill = zf;
    const auto r = magnitude_fid_spectrum(s, 0.5e-3, o, f);
    const std::size_t nz = 512u * zf;
    REQUIRE(r.amplitudes.size() == nz / 2 + 1);
    CHECK(r.zerofill == zf);
    CHECK(r.lb_hz == 5.0);
    CHECK(r.axis.freq_hz[1] == doctest::Approx(1.0 / (nz * 0.5e-3)));
    for (std::size_t k = 1; k < r.axis.ppm.size(); ++k) CHECK(r.axis.ppm[k] < r.axis.ppm[k - 1]);
    for (double a : r.amplitudes) CHECK(a >= 0.0);
    CHECK(r.dominance_ratio >= 0.0);
  }
  CHECK_THROWS_AS(magnitude_fid_spectrum(std::vector<cplx>(512), 0.5e-3, {}, f), EmptySignalError);
  CHECK_THROWS_AS(magnitude_fid_spectrum(std::vector<cplx>(32, 1.0), 0.5e-3, {}, f), InvalidArgument);
}

TEST_CASE("IMCL difference line is shift and phase invariant") {
  const FieldConstants f;
  const auto t = times(1024, 0.5e-3);
  TissueParams p;
  p.water_amp = 1.0;
  p.imcl_amp = 0.1;
  const auto base = magnitude_fid_spectrum(synth_voxel_fid(p, t, f), 0.5e-3, {}, f);
  p.b0_offset_hz = 30.0;
  p.phase0_rad = 1.2;
  const auto moved = magnitude_fid_spectrum(synth_voxel_fid(p, t, f), 0.5e-3, {}, f);
  const double a = peak_ppm(base, 1.0, 1.8), b = peak_ppm(moved, 1.0, 1.8);
  CHECK(std::abs(a - 1.30) <= 0.02);
  CHECK(std::abs(b - 1.30) <= 0.02);
  CHECK(std::abs(a - b) < base.axis.bin_width_hz() / f.hz_per_ppm());
}

TEST_CASE("global phase leaves the modulus spectrum bitwise unchanged") {
  const FieldConstants f;
  TissueParams p;
  p.water_amp = 1.0;
  p.imcl_amp = 0.05;
  p.emcl_amp = 0.1;
  p.fiber_angle_rad = 0.3;
  p.b0_offset_hz = -8.0;
  const auto s = synth_voxel_fid(p, times(1024, 0.5e-3), f);
  const auto ref = magnitude_fid_spectrum(s, 0.5e-3, {}, f);
  for (double ph : {0.3, 1.0, 2.5, 4.0, 6.1}) {
    std::vector<cplx> r(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) r[i] = s[i] * std::polar(1.0, ph);
    CHECK(magnitude_fid_spectrum(r, 0.5e-3, {}, f).amplitudes == ref.amplitudes);
  }
}

TEST_CASE("peaks stay within a bin under B0 offsets") {
  const FieldConstants f;
  const auto t = times(1024, 0.5e-3);
  TissueParams p;
  p.water_amp = 1.0;
  p.emcl_amp = 0.1;
  const auto ref = magnitude_fid_spectrum(synth_voxel_fid(p, t, f), 0.5e-3, {}, f);
  const double bin_ppm = ref.axis.bin_width_hz() / f.hz_per_ppm();
  for (double ppm_shift : {-0.3, -0.1, 0.17, 0.3}) {
    p.b0_offset_hz = ppm_shift * f.hz_per_ppm();
    const auto r = magnitude_fid_spectrum(synth_voxel_fid(p, t, f), 0.5e-3, {}, f);
    CHECK(std::abs(peak_ppm(r, 1.0, 1.8) - peak_ppm(ref, 1.0, 1.8)) < bin_ppm);
  }
}

TEST_CASE("half-axis energy of a real sequence") {
  // conjugate symmetry: full energy = |X0|^2 + 2 sum_{0<k<N/2} |Xk|^2 + |X_{N/2}|^2
  const FieldConstants f;
  TissueParams p;
  p.water_amp = 1.0;
  p.imcl_amp = 0.2;
  const auto s = synth_voxel_fid(p, times(256, 0.5e-3), f);
  SpectralOptions o;
  o.zerofill = 1;
  o.lb_hz = 0.0;
  o.baseline_tail = false;
  const auto r = magnitude_fid_spectrum(s, 0.5e-3, o, f);
  // time-domain energy of the modulus, by Parseval
  double et = 0.0;
  for (const auto& z : s) {
    const double m = static_cast<double>(static_cast<float>(std::abs(z)));
    et += m * m;
  }
  const std::size_t h = r.amplitudes.size() - 1;
  double half = 0.0;
  for (std::size_t k = 1; k < h; ++k) half += r.amplitudes[k] * r.amplitudes[k];
  const double full = r.amplitudes[0] * r.amplitudes[0] + 2.0 * half + r.amplitudes[h] * r.amplitudes[h];
  CHECK(full / 256.0 == doctest::Approx(et).epsilon(1e-10));
}

TEST_CASE("conventional spectrum") {
  const FieldConstants f;
  const auto t = times(512, 0.5e-3);
  // a component exp(-i 2 pi f0 t) lands on f0
  const double f0 = 300.0;
  std::vector<cplx> s(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) s[i] = std::exp(cplx(-20.0, -kTwoPi * f0) * t[i]);
  const auto c = conventional_magnitude_spectrum(s, 0.5e-3, 0.0, 2, f);
  REQUIRE(c.amplitudes.size() == 1024);
  const auto k = argmax(c.amplitudes);
  CHECK(std::abs(c.axis.freq_hz[k] - f0) <= c.axis.bin_width_hz() / 2 + 1e-9);
  for (std::size_t i = 1; i < c.axis.freq_hz.size(); ++i) CHECK(c.axis.freq_hz[i] > c.axis.freq_hz[i - 1]);

  std::vector<cplx> s2(s);
  for (auto& z : s2) z *= 2.0;
  const auto c2 = conventional_magnitude_spectrum(s2, 0.5e-3, 0.0, 2, f);
  for (std::size_t i = 0; i < c.amplitudes.size(); ++i) CHECK(c2.amplitudes[i] == doctest::Approx(2.0 * c.amplitudes[i]));

  CHECK_THROWS_AS(conventional_magnitude_spectrum(std::vector<cplx>(512), 0.5e-3, 0.0, 1, f), EmptySignalError);
}

TEST_CASE("Lorentzian width follows T2* and line broadening") {
  const FieldConstants f;
  const auto t = times(4096, 0.5e-3);
  for (double lb : {0.0, 5.0}) {
    TissueParams p;
    p.water_amp = 1.0;
    p.water_t2s_s = 0.05;
    const auto c = conventional_magnitude_spectrum(synth_voxel_fid(p, t, f), 0.5e-3, lb, 4, f);
    const auto k = argmax(c.amplitudes);
    const double half = c.amplitudes[k] / 2.0;
    // magnitude mode: FWHM of |1/(d + i 2 pi df)| is sqrt(3) d / pi
    std::size_t lo = k, hi = k;
    while (c.amplitudes[lo] > half) --lo;
    while (c.amplitudes[hi] > half) ++hi;
    const double width = (hi - lo) * c.axis.bin_width_hz();
    const double d = 1.0 / p.water_t2s_s + kPi * lb;
    CHECK(width == doctest::Approx(std::sqrt(3.0) * d / kPi).epsilon(0.05));
  }
}

TEST_CASE("water dominance ratio") {
  const FieldConstants f;
  const auto t = times(1024, 0.5e-3);
  TissueParams w;
  w.water_amp = 1.0;
  // power of a Lorentzian inside +/- half_band: (2 / pi) atan(half_band / gamma)
  const double gamma = 1.0 / (w.water_t2s_s * kTwoPi), half_band = 0.5 * f.hz_per_ppm();
  CHECK(water_dominance_ratio(synth_voxel_fid(w, t, f), 0.5e-3, f) ==
        doctest::Approx(2.0 / kPi * std::atan(half_band / gamma)).epsilon(0.01));
  TissueParams l;
  l.imcl_amp = 1.0;
  CHECK(water_dominance_ratio(synth_voxel_fid(l, t, f), 0.5e-3, f) < 0.01);
  TissueParams m = w;
  m.emcl_amp = 0.1;
  CHECK(water_dominance_ratio(synth_voxel_fid(m, t, f), 0.5e-3, f) > 0.9);
}

TEST_CASE("registration offset") {
  const FieldConstants f;
  const auto t = times(1024, 0.5e-3);
  for (double b0 : {-25.3, 0.0, 17.8}) {
    TissueParams p;
    p.water_amp = 1.0;
    p.imcl_amp = 0.1;
    p.b0_offset_hz = b0;
    const auto c = conventional_magnitude_spectrum(synth_voxel_fid(p, t, f), 0.5e-3, 5.0, 2, f);
    // the water component exp(+i 2 pi b0 t) sits at axis frequency -b0
    CHECK(std::abs(registration_offset_hz(c, f) + b0) < 0.5 * c.axis.bin_width_hz());
  }
}

#include "mrsi/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "mrsi/errors.hpp"
#include "mrsi/fft.hpp"
#include "mrsi/simd.hpp"

namespace mrsi {

void SpectralOptions::validate() const {
  if (!(lb_hz >= 0.0)) throw InvalidArgument("lb_hz must be >= 0");
  if (zerofill != 1 && zerofill != 2 && zerofill != 4) {
    throw InvalidArgument("zerofill must be 1, 2 or 4");
  }
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) {
    throw InvalidArgument("tail_fraction must lie in (0, 1)");
  }
}

namespace {

void require_signal(std::span<const cplx> fid) {
  const bool any = std::any_of(fid.begin(), fid.end(), [](const cplx& z) { return z != cplx{}; });
  if (!any) throw EmptySignalError("FID is identically zero");
}

}  // namespace

RegisteredSpectrum magnitude_fid_spectrum(std::span<const cplx> fid, double dwell_s,
                                          const SpectralOptions& opt,
                                          const FieldConstants& field) {
  opt.validate();
  if (fid.size() < 64) throw InvalidArgument("magnitude_fid_spectrum needs at least 64 points");
  if (!(dwell_s > 0.0)) throw InvalidArgument("dwell must be positive");
  require_signal(fid);

  const std::size_t n = fid.size();
  const std::size_t nz = n * static_cast<std::size_t>(opt.zerofill);
  std::vector<double> m(nz, 0.0);
  simd::modulus(fid, std::span<double>(m.data(), n));
  for (std::size_t i = 0; i < n; ++i) m[i] = static_cast<double>(static_cast<float>(m[i]));

  if (opt.baseline_tail) {
    const auto tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(opt.tail_fraction * n)));
    double mean = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) mean += m[i];
    mean /= static_cast<double>(tail);
    for (std::size_t i = 0; i < n; ++i) m[i] -= mean;
  }
  if (opt.lb_hz > 0.0) {
    for (std::size_t i = 0; i < n; ++i) m[i] *= std::exp(-kPi * opt.lb_hz * dwell_s * i);
  }

  std::vector<cplx> spectrum(nz / 2 + 1);
  fft::real_forward(m, spectrum);

  RegisteredSpectrum out;
  out.lb_hz = opt.lb_hz;
  out.zerofill = opt.zerofill;
  out.amplitudes.resize(spectrum.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k) out.amplitudes[k] = std::abs(spectrum[k]);
  out.axis.n = nz;
  out.axis.dwell_s = dwell_s;
  out.axis.freq_hz.resize(spectrum.size());
  out.axis.ppm.resize(spectrum.size());
  const double df = 1.0 / (static_cast<double>(nz) * dwell_s);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    out.axis.freq_hz[k] = static_cast<double>(k) * df;
    out.axis.ppm[k] = offset_hz_to_ppm(out.axis.freq_hz[k], field);
  }
  out.dominance_ratio = water_dominance_ratio(fid, dwell_s, field);
  return out;
}

ConventionalSpectrum conventional_magnitude_spectrum(std::span<const cplx> fid, double dwell_s,
                                                     double lb_hz, int zerofill,
                                                     const FieldConstants& field) {
  if (!(lb_hz >= 0.0)) throw InvalidArgument("lb_hz must be >= 0");
  if (zerofill != 1 && zerofill != 2 && zerofill != 4) {
    throw InvalidArgument("zerofill must be 1, 2 or 4");
  }
  if (fid.size() < 2) throw InvalidArgument("FID too short");
  require_signal(fid);

  const std::size_t n = fid.size();
  const std::size_t nz = n * static_cast<std::size_t>(zerofill);
  std::vector<cplx> buf(nz, cplx{});
  for (std::size_t i = 0; i < n; ++i) {
    buf[i] = lb_hz > 0.0 ? fid[i] * std::exp(-kPi * lb_hz * dwell_s * i) : fid[i];
  }
  // exp(+i 2 pi k n / N) kernel: a component exp(-i 2 pi f t) peaks at +f.
  fft::backward(buf);

  ConventionalSpectrum out;
  out.axis = build_spectral_axis(nz, dwell_s, field);
  out.amplitudes.resize(nz);
  const std::size_t half = nz / 2;
  for (std::size_t k = 0; k < nz; ++k) {
    // axis bin k has offset (k - half) * df, i.e. FFT bin (k - half) mod nz
    out.amplitudes[k] = std::abs(buf[(k + nz - half) % nz]);
  }
  return out;
}

double water_dominance_ratio(std::span<const cplx> fid, double dwell_s,
                             const FieldConstants& field) {
  const auto spec = conventional_magnitude_spectrum(fid, dwell_s, 0.0, 1, field);
  double total = 0.0, water = 0.0;
  for (std::size_t k = 0; k < spec.amplitudes.size(); ++k) {
    const double e = spec.amplitudes[k] * spec.amplitudes[k];
    total += e;
    if (spec.axis.ppm[k] >= 4.2 && spec.axis.ppm[k] <= 5.2) water += e;
  }
  return total > 0.0 ? water / total : 0.0;
}

double registration_offset_hz(const ConventionalSpectrum& spec, const FieldConstants& field,
                              double search_ppm) {
  const double limit = search_ppm * field.hz_per_ppm();
  std::size_t best = spec.amplitudes.size();
  for (std::size_t k = 0; k < spec.amplitudes.size(); ++k) {
    if (std::abs(spec.axis.freq_hz[k]) > limit) continue;
    if (best == spec.amplitudes.size() || spec.amplitudes[k] > spec.amplitudes[best]) best = k;
  }
  if (best == spec.amplitudes.size()) throw InvalidArgument("no bins within the water search window");
  double offset = spec.axis.freq_hz[best];
  if (best > 0 && best + 1 < spec.amplitudes.size()) {
    const double a = spec.amplitudes[best - 1], b = spec.amplitudes[best],
                 c = spec.amplitudes[best + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) {
      const double delta = 0.5 * (a - c) / denom;
      offset += std::clamp(delta, -0.5, 0.5) * spec.axis.bin_width_hz();
    }
  }
  return offset;
}

}  // namespace mrsi

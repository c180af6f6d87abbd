#include "mrsi/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "mrsi/errors.hpp"
#include "mrsi/parallel.hpp"

namespace mrsi {

CsaCurve csa_curve(const RegisteredSpectrum& spec, double lo_ppm, double hi_ppm) {
  if (spec.amplitudes.size() != spec.axis.ppm.size() || spec.amplitudes.empty()) {
    throw InvalidArgument("spectrum and axis sizes differ");
  }
  const auto [mn, mx] = std::minmax_element(spec.axis.ppm.begin(), spec.axis.ppm.end());
  if (lo_ppm < *mn || hi_ppm > *mx) throw InvalidArgument("CSA band outside the spectral axis");
  auto idx = band_indices(spec.axis, lo_ppm, hi_ppm);
  // axis ppm descends with the bin index; accumulate in ascending ppm
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return spec.axis.ppm[a] < spec.axis.ppm[b]; });

  CsaCurve c;
  c.ppm.reserve(idx.size());
  c.values.reserve(idx.size());
  double acc = 0.0;
  for (auto i : idx) {
    acc += spec.amplitudes[i];
    c.ppm.push_back(spec.axis.ppm[i]);
    c.values.push_back(acc);
  }
  c.band_energy = acc;
  c.valid = acc > 0.0;
  if (c.valid) {
    for (auto& v : c.values) v /= acc;
    c.values.back() = 1.0;
  }
  return c;
}

IndicatorResult apparent_content_indicator(const RegisteredSpectrum& spec, double target_ppm,
                                           double lo_ppm, double hi_ppm) {
  const CsaCurve c = csa_curve(spec, lo_ppm, hi_ppm);
  IndicatorResult r;
  r.band_energy = c.band_energy;
  if (!c.valid) {
    r.reason = "zero band energy";
    return r;
  }
  std::size_t best = 0;
  double best_d = std::abs(c.ppm[0] - target_ppm);
  for (std::size_t i = 1; i < c.ppm.size(); ++i) {
    const double d = std::abs(c.ppm[i] - target_ppm);
    if (d < best_d) {  // ascending ppm: strict < keeps the lower bin on ties
      best = i;
      best_d = d;
    }
  }
  r.indicator_pct = std::clamp(100.0 * c.values[best], 0.0, 100.0);
  r.valid = true;
  return r;
}

FractionResult ff_from_csa(const ConventionalSpectrum& spec, double registration_offset_hz,
                           const FieldConstants& field, Band lipid, Band water) {
  if (!(lipid.lo_ppm < lipid.hi_ppm) || !(water.lo_ppm < water.hi_ppm)) {
    throw InvalidArgument("band limits must satisfy lo < hi");
  }
  double sl = 0.0, sw = 0.0;
  std::size_t nl = 0, nw = 0;
  for (std::size_t k = 0; k < spec.amplitudes.size(); ++k) {
    const double ppm = offset_hz_to_ppm(spec.axis.freq_hz[k] - registration_offset_hz, field);
    if (ppm >= lipid.lo_ppm && ppm <= lipid.hi_ppm) {
      sl += spec.amplitudes[k];
      ++nl;
    }
    if (ppm >= water.lo_ppm && ppm <= water.hi_ppm) {
      sw += spec.amplitudes[k];
      ++nw;
    }
  }
  if (nl == 0 || nw == 0) throw InvalidArgument("FF band empty after registration");
  FractionResult r;
  if (sl + sw > 0.0) {
    r.percent = 100.0 * sl / (sl + sw);
    r.valid = true;
  }
  return r;
}

MapImage lipid_mask(const MapImage& band_energy, double min_fraction) {
  if (!(min_fraction >= 0.0)) throw InvalidArgument("mask fraction must be >= 0");
  std::vector<double> nz;
  for (std::size_t i = 0; i < band_energy.size(); ++i) {
    if (band_energy.valid[i] && band_energy.values[i] > 0.0) nz.push_back(band_energy.values[i]);
  }
  MapImage mask(band_energy.nx, band_energy.ny);
  if (nz.empty()) return mask;
  std::sort(nz.begin(), nz.end());
  const std::size_t h = nz.size() / 2;
  const double median = nz.size() % 2 ? nz[h] : 0.5 * (nz[h - 1] + nz[h]);
  const double thr = min_fraction * median;
  for (std::size_t i = 0; i < band_energy.size(); ++i) {
    const bool keep = band_energy.valid[i] && band_energy.values[i] > 0.0 &&
                      band_energy.values[i] >= thr;
    mask.values[i] = keep ? 1.0 : 0.0;
    mask.valid[i] = keep;
  }
  return mask;
}

RoiStats roi_aggregate(const MapImage& map, const Roi& roi) {
  roi.validate(map.nx, map.ny);
  RoiStats s;
  s.label = roi.label;
  double sum = 0.0;
  for (auto i : roi.indices) {
    if (!map.valid[i]) continue;
    sum += map.values[i];
    ++s.n;
  }
  if (s.n == 0) throw EmptyRoiError("ROI '" + roi.label + "' has no valid voxels");
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (auto i : roi.indices) {
      if (map.valid[i]) ss += (map.values[i] - s.mean) * (map.values[i] - s.mean);
    }
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

void AnalysisOptions::validate() const {
  spectral.validate();
  if (!(band_lo_ppm < band_hi_ppm)) throw InvalidArgument("indicator band needs lo < hi");
  if (indicator_ppm < band_lo_ppm || indicator_ppm > band_hi_ppm) {
    throw InvalidArgument("indicator ppm outside the band");
  }
  if (!(mask_fraction >= 0.0)) throw InvalidArgument("mask_fraction must be >= 0");
}

AnalysisMaps analyze_dataset(const SpectroDataset& ds, const AnalysisOptions& opt) {
  ds.validate();
  opt.validate();
  AnalysisMaps m;
  m.indicator = MapImage(ds.nx, ds.ny);
  m.band_energy = MapImage(ds.nx, ds.ny);
  m.ff_csa = MapImage(ds.nx, ds.ny);
  m.dominance = MapImage(ds.nx, ds.ny);

  parallel_for(ds.n_voxels(), [&](std::size_t v) {
    const auto fid = ds.fid(v);
    if (std::all_of(fid.begin(), fid.end(), [](const cplx& z) { return z == cplx{}; })) return;
    const auto reg = magnitude_fid_spectrum(fid, ds.dwell_s, opt.spectral, ds.field);
    const auto ind =
        apparent_content_indicator(reg, opt.indicator_ppm, opt.band_lo_ppm, opt.band_hi_ppm);
    m.band_energy.values[v] = ind.band_energy;
    m.band_energy.valid[v] = 1;
    if (ind.valid) m.indicator.values[v] = ind.indicator_pct;
    m.dominance.values[v] = reg.dominance_ratio;
    m.dominance.valid[v] = 1;

    const auto conv = conventional_magnitude_spectrum(fid, ds.dwell_s, opt.spectral.lb_hz,
                                                      opt.spectral.zerofill, ds.field);
    const double off = registration_offset_hz(conv, ds.field);
    const auto ff = ff_from_csa(conv, off, ds.field, opt.ff_lipid, opt.ff_water);
    m.ff_csa.values[v] = ff.percent;
    m.ff_csa.valid[v] = ff.valid;
  });

  m.mask = lipid_mask(m.band_energy, opt.mask_fraction);
  for (std::size_t v = 0; v < m.indicator.size(); ++v) {
    m.indicator.valid[v] = m.mask.valid[v] && m.band_energy.values[v] > 0.0;
  }
  return m;
}

}  // namespace mrsi

#include "mrsi/phantom.hpp"

#include <cmath>
#include <limits>

#include "mrsi/errors.hpp"
#include "mrsi/parallel.hpp"
#include "mrsi/simd.hpp"

namespace mrsi {

void TissueParams::validate() const {
  if (water_amp < 0.0 || imcl_amp < 0.0 || emcl_amp < 0.0) {
    throw InvalidArgument("tissue amplitudes must be non-negative");
  }
  if (!(water_t2s_s > 0.0) || !(lipid_t2s_s > 0.0)) throw InvalidArgument("T2* must be positive");
  if (!(fiber_angle_rad >= 0.0 && fiber_angle_rad <= kPi / 2 + 1e-12)) {
    throw InvalidArgument("fiber angle must lie in [0, pi/2]");
  }
  if (!(methyl_fraction >= 0.0)) throw InvalidArgument("methyl_fraction must be >= 0");
}

double TissueParams::true_imcl_share() const noexcept {
  const double lipid = imcl_amp + emcl_amp;
  return lipid > 0.0 ? imcl_amp / lipid : 0.0;
}

double TissueParams::true_fat_fraction() const noexcept {
  const double lipid = imcl_amp + emcl_amp;
  const double total = lipid + water_amp;
  return total > 0.0 ? lipid / total : 0.0;
}

bool Region::contains(double x_mm, double y_mm) const noexcept {
  const double dx = x_mm - center_x_mm;
  const double dy = y_mm - center_y_mm;
  if (shape == Shape::Rectangle) return std::abs(dx) <= half_x_mm && std::abs(dy) <= half_y_mm;
  const double u = dx / half_x_mm, v = dy / half_y_mm;
  return u * u + v * v <= 1.0;
}

void PhantomSpec::validate(const AcquisitionConfig& cfg) const {
  const double half_fov = cfg.fov_mm / 2.0 + 1e-9;
  background.validate();
  for (const auto& r : regions) {
    if (!(r.half_x_mm > 0.0) || !(r.half_y_mm > 0.0)) {
      throw InvalidArgument("region '" + r.name + "' must have positive extent");
    }
    if (std::abs(r.center_x_mm) + r.half_x_mm > half_fov ||
        std::abs(r.center_y_mm) + r.half_y_mm > half_fov) {
      throw InvalidArgument("region '" + r.name + "' extends outside the field of view");
    }
    r.tissue.validate();
  }
}

double voxel_center_m(int index, const AcquisitionConfig& cfg) noexcept {
  return (index - cfg.grid_n / 2) * cfg.voxel_m();
}

double emcl_shift_ppm(double theta_rad) noexcept {
  const double c = std::cos(theta_rad);
  return kEmclMaxShiftPpm * (3.0 * c * c - 1.0) / 2.0;
}

double emcl_ppm(double theta_rad) noexcept { return kImclPpm + emcl_shift_ppm(theta_rad); }

PhantomGrid rasterize_phantom(const PhantomSpec& spec, const AcquisitionConfig& cfg) {
  cfg.validate();
  spec.validate(cfg);
  PhantomGrid grid;
  grid.n = cfg.grid_n;
  const auto nvox = static_cast<std::size_t>(cfg.grid_n) * cfg.grid_n;
  grid.voxels.assign(nvox, spec.background);
  grid.region_of.assign(nvox, -1);
  for (int y = 0; y < cfg.grid_n; ++y) {
    const double ym = voxel_center_m(y, cfg) * 1e3;
    for (int x = 0; x < cfg.grid_n; ++x) {
      const double xm = voxel_center_m(x, cfg) * 1e3;
      const std::size_t v = static_cast<std::size_t>(y) * cfg.grid_n + x;
      for (std::size_t r = 0; r < spec.regions.size(); ++r) {
        if (spec.regions[r].contains(xm, ym)) {
          grid.voxels[v] = spec.regions[r].tissue;
          grid.region_of[v] = static_cast<int>(r);
        }
      }
    }
  }
  return grid;
}

namespace {

struct Line {
  cplx amp;   // includes the global phase
  cplx rate;  // exp(rate * t)
};

// Each resonance as amp * exp(rate t); water sits at the B0 offset and lipids
// at -offset(ppm) relative to it.
std::vector<Line> voxel_lines(const TissueParams& p, const FieldConstants& field,
                              bool include_methyl) {
  std::vector<Line> lines;
  const cplx phase = std::polar(1.0, p.phase0_rad);
  const double b0 = kTwoPi * p.b0_offset_hz;
  const double rl = -1.0 / p.lipid_t2s_s;
  auto add = [&](double amp, double ppm, double decay) {
    if (amp == 0.0) return;
    const double w = b0 - kTwoPi * ppm_to_offset_hz(ppm, field);
    lines.push_back({amp * phase, cplx(decay, w)});
  };
  if (p.water_amp != 0.0) lines.push_back({p.water_amp * phase, cplx(-1.0 / p.water_t2s_s, b0)});
  add(p.imcl_amp, kImclPpm, rl);
  add(p.emcl_amp, emcl_ppm(p.fiber_angle_rad), rl);
  if (include_methyl) {
    const double methylene = p.imcl_amp + p.emcl_amp;
    add(p.methyl_fraction * methylene, kMethylPpm, rl);
    add(p.methyl_fraction * methylene, kBetaMethylenePpm, rl);
  }
  return lines;
}

}  // namespace

void synth_voxel_fid(const TissueParams& p, std::span<const double> time_s,
                     const FieldConstants& field, std::span<cplx> out, bool include_methyl) {
  if (out.size() != time_s.size()) throw InvalidArgument("synth_voxel_fid: output size mismatch");
  const auto lines = voxel_lines(p, field, include_methyl);
  for (std::size_t i = 0; i < time_s.size(); ++i) {
    cplx acc{};
    for (const auto& l : lines) acc += l.amp * std::exp(l.rate * time_s[i]);
    out[i] = acc;
  }
}

std::vector<cplx> synth_voxel_fid(const TissueParams& p, std::span<const double> time_s,
                                  const FieldConstants& field, bool include_methyl) {
  std::vector<cplx> out(time_s.size());
  synth_voxel_fid(p, time_s, field, out, include_methyl);
  return out;
}

void RawKSpace::validate(const AcquisitionConfig& cfg) const {
  if (n_arms != cfg.n_spatial_interleaves || n_temporal != cfg.n_temporal_interleaves ||
      n_spectral != cfg.spectral_repeats() || n_samples != cfg.resolved_samples_per_arm()) {
    throw InvalidArgument("raw k-space dimensions do not match the acquisition config");
  }
  if (data.size() != static_cast<std::size_t>(n_arms) * n_temporal * n_spectral * n_samples) {
    throw InvalidArgument("raw k-space storage size mismatch");
  }
}

double sample_time_s(const AcquisitionConfig& cfg, const AcquisitionSchedule& sched, int temporal,
                     int spectral, int sample) noexcept {
  const double start = spectral * sched.spectral_epoch_s + sched.temporal_offsets_s[temporal];
  if (cfg.sim.freeze_readout_time) return start;
  return start + sample * cfg.readout_dwell_s;
}

RawKSpace forward_sample(const PhantomGrid& grid, const AcquisitionSchedule& sched,
                         const AcquisitionConfig& cfg) {
  cfg.validate();
  if (grid.n != cfg.grid_n) throw InvalidArgument("phantom grid size does not match config");
  const int n = cfg.grid_n;
  const int n_arms = static_cast<int>(sched.arms.size());
  const int n_samples = static_cast<int>(sched.arms.front().size());

  RawKSpace raw;
  raw.n_arms = n_arms;
  raw.n_temporal = static_cast<int>(sched.temporal_offsets_s.size());
  raw.n_spectral = sched.spectral_repeats;
  raw.n_samples = n_samples;
  raw.data.assign(static_cast<std::size_t>(n_arms) * raw.n_temporal * raw.n_spectral * n_samples,
                  cplx{});

  // Tissue classes: voxels sharing identical parameters.
  std::vector<TissueParams> classes;
  std::vector<int> class_of(grid.voxels.size(), -1);
  for (std::size_t v = 0; v < grid.voxels.size(); ++v) {
    const auto& p = grid.voxels[v];
    if (p.water_amp == 0.0 && p.imcl_amp == 0.0 && p.emcl_amp == 0.0) continue;
    int c = -1;
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (classes[k] == p) {
        c = static_cast<int>(k);
        break;
      }
    }
    if (c < 0) {
      c = static_cast<int>(classes.size());
      classes.push_back(p);
    }
    class_of[v] = c;
  }
  if (classes.empty()) return raw;
  const std::size_t n_classes = classes.size();

  // Spatial footprint F_c(k) = sum_{v in c} exp(-i 2 pi k.r_v), per arm sample.
  std::vector<double> pos(n);
  for (int i = 0; i < n; ++i) pos[i] = voxel_center_m(i, cfg);
  std::vector<std::vector<cplx>> masks;
  if (n_classes <= static_cast<std::size_t>(n)) {
    masks.assign(n_classes, std::vector<cplx>(grid.voxels.size(), cplx{}));
    for (std::size_t v = 0; v < grid.voxels.size(); ++v) {
      if (class_of[v] >= 0) masks[class_of[v]][v] = 1.0;
    }
  }
  // footprint[(arm * n_classes + c) * n_samples + s]
  std::vector<cplx> footprint(static_cast<std::size_t>(n_arms) * n_classes * n_samples);
  parallel_for(static_cast<std::size_t>(n_arms) * n_samples, [&](std::size_t job) {
    const int a = static_cast<int>(job / n_samples);
    const int s = static_cast<int>(job % n_samples);
    const double kx = sched.arms[a].kx[s], ky = sched.arms[a].ky[s];
    std::vector<cplx> px(n), py(n), rows(n);
    for (int i = 0; i < n; ++i) {
      px[i] = std::polar(1.0, -kTwoPi * kx * pos[i]);
      py[i] = std::polar(1.0, -kTwoPi * ky * pos[i]);
    }
    if (n_classes > static_cast<std::size_t>(n)) {
      // Heterogeneous phantoms: one pass over the voxels, scattered by class.
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          const int c = class_of[static_cast<std::size_t>(y) * n + x];
          if (c >= 0) footprint[(a * n_classes + c) * n_samples + s] += py[y] * px[x];
        }
      }
      return;
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
      for (int y = 0; y < n; ++y) {
        rows[y] = simd::dot(
            std::span<const cplx>(masks[c].data() + static_cast<std::size_t>(y) * n, n), px);
      }
      footprint[(a * n_classes + c) * n_samples + s] = simd::dot(rows, py);
    }
  });

  // Temporal evolution. Per class and line, exp(rate * (start + s dt)) =
  // exp(rate * start) * readout[s]; the readout table is 1 when frozen.
  struct ClassLines {
    std::vector<Line> lines;
    std::vector<std::vector<cplx>> readout;  // [line][sample]
  };
  std::vector<ClassLines> cl(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    cl[c].lines = voxel_lines(classes[c], cfg.field, cfg.sim.include_methyl);
    for (const auto& l : cl[c].lines) {
      std::vector<cplx> r(n_samples, cplx{1.0, 0.0});
      if (!cfg.sim.freeze_readout_time) {
        for (int s = 0; s < n_samples; ++s) r[s] = std::exp(l.rate * (s * cfg.readout_dwell_s));
      }
      cl[c].readout.push_back(std::move(r));
    }
  }

  const std::size_t n_jobs = static_cast<std::size_t>(raw.n_temporal) * raw.n_spectral;
  parallel_for(n_jobs, [&](std::size_t job) {
    const int j = static_cast<int>(job / raw.n_spectral);
    const int m = static_cast<int>(job % raw.n_spectral);
    const double start = m * sched.spectral_epoch_s + sched.temporal_offsets_s[j];
    // signal[c][s]: class signal along one readout
    std::vector<std::vector<cplx>> signal(n_classes, std::vector<cplx>(n_samples));
    for (std::size_t c = 0; c < n_classes; ++c) {
      auto& sig = signal[c];
      std::fill(sig.begin(), sig.end(), cplx{});
      for (std::size_t l = 0; l < cl[c].lines.size(); ++l) {
        const cplx coef = cl[c].lines[l].amp * std::exp(cl[c].lines[l].rate * start);
        simd::axpy(coef, cl[c].readout[l], sig);
      }
    }
    for (int a = 0; a < n_arms; ++a) {
      std::span<cplx> out(raw.data.data() + raw.index(a, j, m, 0), n_samples);
      for (std::size_t c = 0; c < n_classes; ++c) {
        simd::mul_acc(std::span<const cplx>(footprint.data() + (a * n_classes + c) * n_samples,
                                            n_samples),
                      signal[c], out);
      }
    }
  });
  return raw;
}

GaussianSource::GaussianSource(std::uint64_t seed) : engine_(seed) {}

double GaussianSource::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Uniform in (0, 1] from the top 53 bits.
  constexpr double kScale = 1.0 / 9007199254740992.0;
  double u1 = 0.0;
  do {
    u1 = static_cast<double>(engine_() >> 11) * kScale;
  } while (u1 <= 0.0);
  const double u2 = static_cast<double>(engine_() >> 11) * kScale;
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  have_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

RawKSpace add_noise(RawKSpace raw, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");
  raw.noise_sigma = sigma;
  raw.rng_seed = seed;
  if (sigma == 0.0) return raw;
  GaussianSource gauss(seed);
  for (auto& z : raw.data) z += gauss.next_complex(sigma);
  return raw;
}

}  // namespace mrsi

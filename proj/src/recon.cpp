#include "mrsi/recon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mrsi/errors.hpp"
#include "mrsi/fft.hpp"
#include "mrsi/parallel.hpp"
#include "mrsi/simd.hpp"

namespace mrsi {

int oversampled_size(const GriddingConfig& gcfg, int n) {
  int g = static_cast<int>(std::lround(gcfg.oversampling * n));
  if (g % 2 != 0) ++g;
  return std::max(g, n);
}

Gridder::Gridder(const std::vector<SpiralArm>& arms, const std::vector<DensityWeights>& weights,
                 const GriddingConfig& gcfg, const AcquisitionConfig& cfg)
    : g_(oversampled_size(gcfg, cfg.grid_n)),
      n_(cfg.grid_n),
      kernel_(gcfg.oversampled_width(), gcfg.resolved_beta()) {
  gcfg.validate();
  if (arms.size() != weights.size()) throw InvalidArgument("one weight set per arm required");
  // Grid spacing in 1/m; DC sits at index g/2.
  const double dk = 1.0 / (static_cast<double>(g_) / n_ * cfg.fov_m());
  const double limit = g_ / 2.0;
  const double half_w = gcfg.oversampled_width() / 2.0;

  std::vector<std::size_t> rejected;
  std::size_t flat = 0;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    if (weights[a].w.size() != arms[a].size()) {
      throw InvalidArgument("density weights do not match arm length");
    }
    for (std::size_t s = 0; s < arms[a].size(); ++s, ++flat) {
      const double ux = arms[a].kx[s] / dk;
      const double uy = arms[a].ky[s] / dk;
      if (std::abs(ux) > limit + 1e-9 || std::abs(uy) > limit + 1e-9) {
        rejected.push_back(flat);
        continue;
      }
      Taps t;
      const double cx = ux + g_ / 2.0, cy = uy + g_ / 2.0;
      t.x0 = static_cast<int>(std::ceil(cx - half_w));
      t.y0 = static_cast<int>(std::ceil(cy - half_w));
      const int x1 = static_cast<int>(std::floor(cx + half_w));
      const int y1 = static_cast<int>(std::floor(cy + half_w));
      for (int gx = t.x0; gx <= x1; ++gx) t.wx.push_back(kernel_(gx - cx));
      for (int gy = t.y0; gy <= y1; ++gy) t.wy.push_back(kernel_(gy - cy));
      t.dcf = weights[a].w[s];
      taps_.push_back(std::move(t));
    }
  }
  if (!rejected.empty()) {
    std::ostringstream msg;
    msg << "k-space samples beyond k_max * oversampling at flat indices:";
    for (std::size_t i = 0; i < rejected.size() && i < 32; ++i) msg << ' ' << rejected[i];
    if (rejected.size() > 32) msg << " ... (" << rejected.size() << " total)";
    throw InvalidArgument(msg.str());
  }
}

KGrid Gridder::grid(std::span<const cplx> slice) const {
  if (slice.size() != taps_.size()) throw InvalidArgument("slice length does not match trajectory");
  KGrid out;
  out.g = g_;
  out.n = n_;
  out.data.assign(static_cast<std::size_t>(g_) * g_, cplx{});
  for (std::size_t j = 0; j < taps_.size(); ++j) {
    const cplx value = slice[j] * taps_[j].dcf;
    if (value == cplx{}) continue;
    const auto& t = taps_[j];
    const int nx = static_cast<int>(t.wx.size());
    const bool contiguous = t.x0 >= 0 && t.x0 + nx <= g_;
    for (std::size_t r = 0; r < t.wy.size(); ++r) {
      const int gy = ((t.y0 + static_cast<int>(r)) % g_ + g_) % g_;
      cplx* row = out.data.data() + static_cast<std::size_t>(gy) * g_;
      const cplx alpha = value * t.wy[r];
      if (contiguous) {
        simd::axpy_real(alpha, t.wx, std::span<cplx>(row + t.x0, static_cast<std::size_t>(nx)));
      } else {
        for (int c = 0; c < nx; ++c) {
          const int gx = ((t.x0 + c) % g_ + g_) % g_;
          row[gx] += alpha * t.wx[c];
        }
      }
    }
  }
  return out;
}

KGrid grid_timepoint(std::span<const cplx> slice, const std::vector<SpiralArm>& arms,
                     const std::vector<DensityWeights>& weights, const GriddingConfig& gcfg,
                     const AcquisitionConfig& cfg) {
  return Gridder(arms, weights, gcfg, cfg).grid(slice);
}

Image ifft2_deapodize(const KGrid& kgrid, const GriddingConfig& gcfg) {
  const int g = kgrid.g, n = kgrid.n;
  if (kgrid.data.size() != static_cast<std::size_t>(g) * g) {
    throw InvalidArgument("k-space grid storage does not match its size");
  }
  std::vector<cplx> buf(kgrid.data);
  // Centered transform: checkerboard before and after a plain backward FFT
  // maps index (i - g/2) <-> (p - g/2); for even g the residual sign is +1.
  for (int y = 0; y < g; ++y) {
    for (int x = 0; x < g; ++x) {
      if ((x + y) & 1) buf[static_cast<std::size_t>(y) * g + x] = -buf[static_cast<std::size_t>(y) * g + x];
    }
  }
  fft::backward_2d(buf, g, g);

  const KaiserBessel kernel(gcfg.oversampled_width(), gcfg.resolved_beta());
  std::vector<double> deapod(n);
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    deapod[i] = kernel.transform(static_cast<double>(i - n / 2) / g);
    peak = std::max(peak, std::abs(deapod[i]));
  }
  const double floor = 1e-6 * peak;
  for (double& d : deapod) {
    if (std::abs(d) < floor) d = d < 0.0 ? -floor : floor;
  }

  Image img;
  img.n = n;
  img.data.resize(static_cast<std::size_t>(n) * n);
  const int off = (g - n) / 2;
  for (int y = 0; y < n; ++y) {
    const int py = y + off;
    for (int x = 0; x < n; ++x) {
      const int px = x + off;
      cplx v = buf[static_cast<std::size_t>(py) * g + px];
      if ((px + py) & 1) v = -v;
      img.data[static_cast<std::size_t>(y) * n + x] = v / (deapod[x] * deapod[y]);
    }
  }
  return img;
}

Image dft_oracle_recon(std::span<const cplx> slice, const std::vector<SpiralArm>& arms,
                       const std::vector<DensityWeights>& weights, const AcquisitionConfig& cfg) {
  const int n = cfg.grid_n;
  std::size_t total = 0;
  for (const auto& a : arms) total += a.size();
  if (slice.size() != total) throw InvalidArgument("slice length does not match trajectory");

  std::vector<double> pos(n);
  for (int i = 0; i < n; ++i) pos[i] = voxel_center_m(i, cfg);

  Image img;
  img.n = n;
  img.data.assign(static_cast<std::size_t>(n) * n, cplx{});
  std::vector<cplx> ex(n);
  std::size_t j = 0;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    for (std::size_t s = 0; s < arms[a].size(); ++s, ++j) {
      const cplx value = weights[a].w[s] * slice[j];
      if (value == cplx{}) continue;
      const double kx = arms[a].kx[s], ky = arms[a].ky[s];
      for (int x = 0; x < n; ++x) ex[x] = std::polar(1.0, kTwoPi * kx * pos[x]);
      for (int y = 0; y < n; ++y) {
        const cplx alpha = value * std::polar(1.0, kTwoPi * ky * pos[y]);
        simd::axpy(alpha, ex,
                   std::span<cplx>(img.data.data() + static_cast<std::size_t>(y) * n,
                                   static_cast<std::size_t>(n)));
      }
    }
  }
  return img;
}

std::vector<cplx> raw_slice(const RawKSpace& raw, int temporal, int spectral) {
  std::vector<cplx> out(static_cast<std::size_t>(raw.n_arms) * raw.n_samples);
  for (int a = 0; a < raw.n_arms; ++a) {
    const cplx* src = raw.data.data() + raw.index(a, temporal, spectral, 0);
    std::copy(src, src + raw.n_samples, out.begin() + static_cast<std::ptrdiff_t>(a) * raw.n_samples);
  }
  return out;
}

ImageStack reconstruct_interleaf(const RawKSpace& raw, int temporal, const Gridder& gridder,
                                 const GriddingConfig& gcfg) {
  ImageStack stack;
  stack.frames.resize(raw.n_spectral);
  parallel_for(static_cast<std::size_t>(raw.n_spectral), [&](std::size_t m) {
    const auto slice = raw_slice(raw, temporal, static_cast<int>(m));
    stack.frames[m] = ifft2_deapodize(gridder.grid(slice), gcfg);
  });
  stack.n = stack.frames.empty() ? 0 : stack.frames.front().n;
  return stack;
}

SpectroDataset assemble_voxel_fids(const std::vector<ImageStack>& stacks,
                                   const AcquisitionSchedule& sched, const AcquisitionConfig& cfg) {
  const int T = static_cast<int>(stacks.size());
  if (T < 1 || T != static_cast<int>(sched.temporal_offsets_s.size())) {
    throw InvalidArgument("one image stack per temporal interleaf required");
  }
  const int n = stacks.front().n;
  const std::size_t repeats = stacks.front().frames.size();
  for (const auto& st : stacks) {
    if (st.n != n || st.frames.size() != repeats) {
      throw InvalidArgument("temporal interleaf stacks have inconsistent shapes");
    }
    for (const auto& f : st.frames) {
      if (f.n != n || f.data.size() != static_cast<std::size_t>(n) * n) {
        throw InvalidArgument("image frame has inconsistent shape");
      }
    }
  }
  const auto n_points = static_cast<std::size_t>(cfg.n_spectral_points);
  if (repeats * static_cast<std::size_t>(T) < n_points) {
    throw InvalidArgument("image stacks hold fewer samples than n_spectral_points");
  }
  const double dwell = sched.spectral_epoch_s / T;
  SpectroDataset ds = make_dataset(n, n, n_points, dwell, cfg.field, cfg.te_s);
  for (std::size_t v = 0; v < ds.n_voxels(); ++v) {
    auto fid = ds.fid(v);
    for (std::size_t k = 0; k < n_points; ++k) {
      const std::size_t m = k / T;
      const std::size_t j = k % T;
      fid[k] = stacks[j].frames[m].data[v];
    }
  }
  return ds;
}

ReconResult reconstruct(const RawKSpace& raw, const AcquisitionConfig& cfg,
                        const GriddingConfig& gcfg) {
  raw.validate(cfg);
  gcfg.validate();
  const AcquisitionSchedule sched = make_schedule(cfg);
  std::vector<DensityWeights> weights;
  weights.reserve(sched.arms.size());
  for (const auto& arm : sched.arms) weights.push_back(density_weights(arm, cfg));
  const Gridder gridder(sched.arms, weights, gcfg, cfg);

  std::vector<ImageStack> stacks;
  stacks.reserve(raw.n_temporal);
  for (int j = 0; j < raw.n_temporal; ++j) {
    stacks.push_back(reconstruct_interleaf(raw, j, gridder, gcfg));
  }
  ReconResult result;
  result.dataset = assemble_voxel_fids(stacks, sched, cfg);
  result.gridding = gcfg;
  result.gridding.beta = gcfg.resolved_beta();
  result.oversampled_grid = gridder.grid_size();
  return result;
}

double interior_nrmse(const Image& test, const Image& ref, double fraction) {
  if (test.n != ref.n || test.data.size() != ref.data.size()) {
    throw InvalidArgument("interior_nrmse: image size mismatch");
  }
  const int n = ref.n;
  const int keep = std::max(1, static_cast<int>(std::lround(fraction * n)));
  const int lo = (n - keep) / 2, hi = lo + keep;
  double err = 0.0, norm = 0.0;
  for (int y = lo; y < hi; ++y) {
    for (int x = lo; x < hi; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * n + x;
      err += std::norm(test.data[i] - ref.data[i]);
      norm += std::norm(ref.data[i]);
    }
  }
  if (norm == 0.0) return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(err / norm);
}

}  // namespace mrsi

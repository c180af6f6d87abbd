#pragma once

// Kaiser-Bessel gridding reconstruction of spiral MRSI data, temporal
// interleave weaving, and the direct conjugate-phase reference.

#include <span>
#include <vector>

#include "mrsi/acquisition.hpp"
#include "mrsi/model.hpp"
#include "mrsi/phantom.hpp"

namespace mrsi {

struct GriddingConfig {
  double oversampling = 1.5;
  double kernel_width = 4.0;  // in target grid cells
  /// <= 0 selects pi * sqrt((W/os * (os - 0.5))^2 - 0.8), W in oversampled cells.
  double beta = 0.0;

  /// Kernel width on the oversampled grid: kernel_width * oversampling.
  double oversampled_width() const noexcept { return kernel_width * oversampling; }
  double resolved_beta() const;
  void validate() const;
};

/// Separable Kaiser-Bessel kernel on the oversampled grid.
class KaiserBessel {
 public:
  KaiserBessel(double width, double beta);

  /// Kernel value at offset u (grid cells), zero for |u| > W/2; equals 1 at u = 0.
  double operator()(double u) const;
  /// Continuous Fourier transform of the kernel at nu cycles per grid cell.
  double transform(double nu) const;

  double width() const noexcept { return width_; }
  double beta() const noexcept { return beta_; }

 private:
  double width_;
  double beta_;
  double i0_beta_;
};

/// Oversampled Cartesian k-space grid (row-major, DC at [G/2][G/2]).
struct KGrid {
  int g = 0;       // oversampled size
  int n = 0;       // target image size
  std::vector<cplx> data;
};

/// Complex image, row-major [y][x] with y, x in [0, n).
struct Image {
  int n = 0;
  std::vector<cplx> data;
};

/// Images per spectral repeat for one temporal interleaf.
struct ImageStack {
  int n = 0;
  std::vector<Image> frames;
};

/// Precomputed kernel taps for a fixed trajectory; grids any number of
/// k-space slices sharing that trajectory.
class Gridder {
 public:
  Gridder(const std::vector<SpiralArm>& arms, const std::vector<DensityWeights>& weights,
          const GriddingConfig& gcfg, const AcquisitionConfig& cfg);

  /// slice holds every arm's samples for one time point, [arm][sample].
  KGrid grid(std::span<const cplx> slice) const;

  int grid_size() const noexcept { return g_; }
  std::size_t n_samples() const noexcept { return taps_.size(); }
  const KaiserBessel& kernel() const noexcept { return kernel_; }

 private:
  struct Taps {
    int x0 = 0, y0 = 0;  // first tap index (may be negative; wrapped modulo g)
    std::vector<double> wx, wy;
    double dcf = 0.0;
  };
  int g_ = 0;
  int n_ = 0;
  KaiserBessel kernel_;
  std::vector<Taps> taps_;
};

/// Oversampled grid size: round(os * n) made even.
int oversampled_size(const GriddingConfig& gcfg, int n);

KGrid grid_timepoint(std::span<const cplx> slice, const std::vector<SpiralArm>& arms,
                     const std::vector<DensityWeights>& weights, const GriddingConfig& gcfg,
                     const AcquisitionConfig& cfg);

/// Centered inverse FFT, crop to n x n, divide by the kernel's analytic
/// transform (floored at 1e-6 of its maximum).
Image ifft2_deapodize(const KGrid& kgrid, const GriddingConfig& gcfg);

/// Direct conjugate-phase sum image(r) = sum_j w_j S_j exp(+i 2 pi k_j.r).
Image dft_oracle_recon(std::span<const cplx> slice, const std::vector<SpiralArm>& arms,
                       const std::vector<DensityWeights>& weights, const AcquisitionConfig& cfg);

/// Gathers the [arm][sample] slice for one (temporal, spectral) readout.
std::vector<cplx> raw_slice(const RawKSpace& raw, int temporal, int spectral);

/// Reconstructs every spectral repeat of one temporal interleaf.
ImageStack reconstruct_interleaf(const RawKSpace& raw, int temporal, const Gridder& gridder,
                                 const GriddingConfig& gcfg);

/// Weaves T interleaf stacks into per-voxel FIDs: sample m*T + j comes from
/// stack j, repeat m; the first n_spectral_points samples are kept.
SpectroDataset assemble_voxel_fids(const std::vector<ImageStack>& stacks,
                                   const AcquisitionSchedule& sched, const AcquisitionConfig& cfg);

struct ReconResult {
  SpectroDataset dataset;
  GriddingConfig gridding;  // beta resolved
  int oversampled_grid = 0;
};

/// Full reconstruction: density weights, gridding per (interleaf, repeat), weave.
ReconResult reconstruct(const RawKSpace& raw, const AcquisitionConfig& cfg,
                        const GriddingConfig& gcfg);

/// Normalized RMS error of `test` against `ref` over the central `fraction`
/// of the field of view (per axis).
double interior_nrmse(const Image& test, const Image& ref, double fraction);

}  // namespace mrsi

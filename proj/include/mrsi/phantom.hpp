#pragma once

// Digital calf phantom and the discrete Fourier forward model that turns it
// into spiral k-space samples.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mrsi/acquisition.hpp"
#include "mrsi/model.hpp"

namespace mrsi {

// Lipid resonance positions used by the signal model (ppm).
inline constexpr double kImclPpm = 1.30;
inline constexpr double kEmclMaxShiftPpm = 0.20;
inline constexpr double kMethylPpm = 0.90;
inline constexpr double kBetaMethylenePpm = 1.10;
inline constexpr double kMagicAngleRad = 0.9553166181245093;  // acos(1/sqrt(3))

struct TissueParams {
  double water_amp = 0.0;
  double water_t2s_s = 0.030;
  double imcl_amp = 0.0;
  double emcl_amp = 0.0;
  double lipid_t2s_s = 0.040;
  double fiber_angle_rad = 0.0;
  double b0_offset_hz = 0.0;
  double phase0_rad = 0.0;
  /// Methyl and beta-methylene amplitudes as fractions of total methylene
  /// (used only when SimulationOptions::include_methyl is set).
  double methyl_fraction = 0.15;

  bool operator==(const TissueParams&) const = default;
  void validate() const;
  /// imcl / (imcl + emcl); 0 when there is no lipid.
  double true_imcl_share() const noexcept;
  /// lipid / (lipid + water) from amplitudes; 0 for an empty voxel.
  double true_fat_fraction() const noexcept;
};

enum class Shape { Rectangle, Ellipse };

/// Geometric primitive in millimetres, FOV centered on the origin
/// (x to the right, y up the image rows).
struct Region {
  std::string name;
  Shape shape = Shape::Rectangle;
  double center_x_mm = 0.0;
  double center_y_mm = 0.0;
  double half_x_mm = 0.0;
  double half_y_mm = 0.0;
  TissueParams tissue;

  bool contains(double x_mm, double y_mm) const noexcept;
};

struct PhantomSpec {
  std::vector<Region> regions;  // later regions override earlier ones
  TissueParams background;      // zero amplitudes by default

  void validate(const AcquisitionConfig& cfg) const;
};

/// Per-voxel tissue parameters, row-major [y][x].
struct PhantomGrid {
  int n = 0;
  std::vector<TissueParams> voxels;
  std::vector<int> region_of;  // -1 for background

  const TissueParams& at(int x, int y) const { return voxels[static_cast<std::size_t>(y) * n + x]; }
};

/// Voxel center positions in metres for an n x n grid over the FOV.
double voxel_center_m(int index, const AcquisitionConfig& cfg) noexcept;

/// EMCL shift relative to IMCL: dmax (3 cos^2 theta - 1) / 2 with dmax = 0.20 ppm.
double emcl_shift_ppm(double theta_rad) noexcept;
double emcl_ppm(double theta_rad) noexcept;

PhantomGrid rasterize_phantom(const PhantomSpec& spec, const AcquisitionConfig& cfg);

/// Evaluate the three-line Lorentzian voxel signal at arbitrary times.
void synth_voxel_fid(const TissueParams& p, std::span<const double> time_s,
                     const FieldConstants& field, std::span<cplx> out,
                     bool include_methyl = false);
std::vector<cplx> synth_voxel_fid(const TissueParams& p, std::span<const double> time_s,
                                  const FieldConstants& field, bool include_methyl = false);

/// Raw samples, row-major [arm][temporal_interleaf][spectral_repeat][readout_sample].
struct RawKSpace {
  int n_arms = 0;
  int n_temporal = 0;
  int n_spectral = 0;
  int n_samples = 0;
  double noise_sigma = 0.0;
  std::uint64_t rng_seed = 0;
  std::vector<cplx> data;

  std::size_t index(int arm, int temporal, int spectral, int sample) const noexcept {
    return ((static_cast<std::size_t>(arm) * n_temporal + temporal) * n_spectral + spectral) *
               n_samples +
           sample;
  }
  cplx& at(int arm, int temporal, int spectral, int sample) {
    return data[index(arm, temporal, spectral, sample)];
  }
  const cplx& at(int arm, int temporal, int spectral, int sample) const {
    return data[index(arm, temporal, spectral, sample)];
  }
  void validate(const AcquisitionConfig& cfg) const;
};

/// Acquisition time of one raw sample relative to the first readout start.
double sample_time_s(const AcquisitionConfig& cfg, const AcquisitionSchedule& sched, int temporal,
                     int spectral, int sample) noexcept;

/// S(k, t) = sum over voxels of s_voxel(t) exp(-i 2 pi k.r). Voxels with
/// identical tissue parameters are summed through their shared spatial
/// footprint, which is algebraically the same sum.
RawKSpace forward_sample(const PhantomGrid& grid, const AcquisitionSchedule& sched,
                         const AcquisitionConfig& cfg);

/// Adds i.i.d. circular complex Gaussian noise (sigma per real channel).
RawKSpace add_noise(RawKSpace raw, double sigma, std::uint64_t seed);

/// Deterministic normal deviates: mt19937_64 + Box-Muller, identical across
/// standard libraries.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed);
  double next();
  cplx next_complex(double sigma) {
    const double re = sigma * next();
    const double im = sigma * next();
    return {re, im};
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mrsi

#pragma once

// Core domain types and spectral-axis helpers shared by every stage.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mrsi {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct FieldConstants {
  double larmor_mhz = 123.25;
  double water_ref_ppm = 4.70;

  /// 1 ppm expressed in Hz equals the Larmor frequency in MHz.
  double hz_per_ppm() const noexcept { return larmor_mhz; }
  void validate() const;
};

/// Options that only affect the forward simulation.
struct SimulationOptions {
  /// Collapse within-readout time to the readout start (idealized acquisition).
  bool freeze_readout_time = false;
  /// Add the methyl (0.9 ppm) and beta-methylene (1.1 ppm) lipid lines.
  bool include_methyl = false;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
};

struct AcquisitionConfig {
  double fov_mm = 200.0;
  double slab_mm = 25.0;
  int grid_n = 64;
  int n_spatial_interleaves = 22;
  int n_temporal_interleaves = 5;
  int n_spectral_points = 1024;
  double spectral_dwell_s = 0.5e-3;
  double tr_s = 2.0;
  double te_s = 0.002;
  /// Samples per spiral arm; 0 selects 4 * grid_n * n_turns (rounded up).
  int samples_per_arm = 0;
  double readout_dwell_s = 4e-6;
  FieldConstants field;
  SimulationOptions sim;

  double fov_m() const noexcept { return fov_mm * 1e-3; }
  double voxel_m() const noexcept { return fov_m() / grid_n; }
  /// Maximum k-space radius in 1/m: grid_n / (2 fov).
  double k_max() const noexcept { return grid_n / (2.0 * fov_m()); }
  /// Turns per arm of the Archimedean spiral: grid_n / (2 n_arms).
  double n_turns() const noexcept {
    return static_cast<double>(grid_n) / (2.0 * n_spatial_interleaves);
  }
  int resolved_samples_per_arm() const;
  /// Period between repeated readouts of one temporal interleaf.
  double epoch_s() const noexcept { return n_temporal_interleaves * spectral_dwell_s; }
  /// Readouts acquired per temporal interleaf: ceil(n_spectral_points / T).
  int spectral_repeats() const noexcept {
    return (n_spectral_points + n_temporal_interleaves - 1) / n_temporal_interleaves;
  }
  void validate() const;
};

/// Frequency/chemical-shift axis. freq_hz is the offset below water in the
/// positive-difference convention used throughout: ppm = water_ref - f / hz_per_ppm.
struct SpectralAxis {
  std::size_t n = 0;
  double dwell_s = 0.0;
  std::vector<double> freq_hz;
  std::vector<double> ppm;

  double bandwidth_hz() const noexcept { return 1.0 / dwell_s; }
  double bin_width_hz() const noexcept { return 1.0 / (static_cast<double>(n) * dwell_s); }
};

/// Full FFT-ordered axis: offsets span [-BW/2, BW/2) in ascending order, DC at n/2.
SpectralAxis build_spectral_axis(std::size_t n_points, double dwell_s, const FieldConstants& field);

double ppm_to_offset_hz(double ppm, const FieldConstants& field) noexcept;
double offset_hz_to_ppm(double offset_hz, const FieldConstants& field) noexcept;

/// Indices of bins whose center ppm lies in the closed band [ppm_lo, ppm_hi],
/// in axis order. Throws InvalidArgument for an empty result or lo >= hi.
std::vector<std::size_t> band_indices(const SpectralAxis& axis, double ppm_lo, double ppm_hi);

struct SpectroDataset {
  int nx = 0;
  int ny = 0;
  std::size_t n_points = 0;
  double dwell_s = 0.0;
  /// Echo time of the first sample; time_s itself starts at 0.
  double te_s = 0.0;
  FieldConstants field;
  std::vector<double> time_s;
  /// Voxel-major: fids[(y * nx + x) * n_points + t].
  std::vector<cplx> fids;

  std::size_t n_voxels() const noexcept { return static_cast<std::size_t>(nx) * ny; }
  std::span<const cplx> fid(std::size_t voxel) const {
    return {fids.data() + voxel * n_points, n_points};
  }
  std::span<cplx> fid(std::size_t voxel) { return {fids.data() + voxel * n_points, n_points}; }
  void validate() const;
};

SpectroDataset make_dataset(int nx, int ny, std::size_t n_points, double dwell_s,
                            const FieldConstants& field, double te_s = 0.0);

struct MapImage {
  int nx = 0;
  int ny = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  MapImage() = default;
  MapImage(int nx_, int ny_)
      : nx(nx_), ny(ny_), values(static_cast<std::size_t>(nx_) * ny_, 0.0),
        valid(static_cast<std::size_t>(nx_) * ny_, 0) {}

  std::size_t size() const noexcept { return values.size(); }
  void validate() const;
};

struct Roi {
  std::string label;
  std::vector<std::size_t> indices;

  /// Indices unique and inside an nx*ny grid.
  void validate(int nx, int ny) const;
};

}  // namespace mrsi

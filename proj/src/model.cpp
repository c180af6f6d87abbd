#include "mrsi/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "mrsi/errors.hpp"

namespace mrsi {

void FieldConstants::validate() const {
  if (!(larmor_mhz > 0.0) || !std::isfinite(larmor_mhz)) {
    throw InvalidArgument("larmor_mhz must be positive");
  }
  if (!(water_ref_ppm > 0.0 && water_ref_ppm < 10.0)) {
    throw InvalidArgument("water_ref_ppm must lie in (0, 10)");
  }
}

int AcquisitionConfig::resolved_samples_per_arm() const {
  if (samples_per_arm > 0) return samples_per_arm;
  return static_cast<int>(std::ceil(4.0 * grid_n * n_turns() - 1e-9));
}

void AcquisitionConfig::validate() const {
  field.validate();
  if (!(fov_mm > 0.0)) throw InvalidArgument("fov_mm must be positive");
  if (grid_n < 2 || (grid_n & (grid_n - 1)) != 0) {
    throw InvalidArgument("grid_n must be a power of two >= 2");
  }
  if (n_spatial_interleaves < 1) throw InvalidArgument("n_spatial_interleaves must be >= 1");
  if (n_temporal_interleaves < 1) throw InvalidArgument("n_temporal_interleaves must be >= 1");
  if (n_spectral_points < 2) throw InvalidArgument("n_spectral_points must be >= 2");
  if (!(spectral_dwell_s > 0.0)) throw InvalidArgument("spectral_dwell_s must be positive");
  if (!(readout_dwell_s > 0.0)) throw InvalidArgument("readout_dwell_s must be positive");
  if (samples_per_arm < 0) throw InvalidArgument("samples_per_arm must be >= 0");
  if (!(sim.noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
}

SpectralAxis build_spectral_axis(std::size_t n_points, double dwell_s,
                                 const FieldConstants& field) {
  if (n_points < 2) throw InvalidArgument("spectral axis needs at least 2 points");
  if (!(dwell_s > 0.0) || !std::isfinite(dwell_s)) {
    throw InvalidArgument("spectral dwell must be positive");
  }
  field.validate();
  SpectralAxis axis;
  axis.n = n_points;
  axis.dwell_s = dwell_s;
  axis.freq_hz.resize(n_points);
  axis.ppm.resize(n_points);
  const double df = 1.0 / (static_cast<double>(n_points) * dwell_s);
  const auto half = static_cast<std::ptrdiff_t>(n_points / 2);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double f = static_cast<double>(static_cast<std::ptrdiff_t>(k) - half) * df;
    axis.freq_hz[k] = f;
    axis.ppm[k] = offset_hz_to_ppm(f, field);
  }
  return axis;
}

double ppm_to_offset_hz(double ppm, const FieldConstants& field) noexcept {
  return (field.water_ref_ppm - ppm) * field.hz_per_ppm();
}

double offset_hz_to_ppm(double offset_hz, const FieldConstants& field) noexcept {
  return field.water_ref_ppm - offset_hz / field.hz_per_ppm();
}

std::vector<std::size_t> band_indices(const SpectralAxis& axis, double ppm_lo, double ppm_hi) {
  if (!(ppm_lo < ppm_hi)) throw InvalidArgument("band requires ppm_lo < ppm_hi");
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < axis.ppm.size(); ++k) {
    if (axis.ppm[k] >= ppm_lo && axis.ppm[k] <= ppm_hi) out.push_back(k);
  }
  if (out.empty()) {
    std::ostringstream msg;
    msg << "band [" << ppm_lo << ", " << ppm_hi << "] ppm contains no axis bins";
    throw InvalidArgument(msg.str());
  }
  return out;
}

void SpectroDataset::validate() const {
  if (nx <= 0 || ny <= 0) throw InvalidArgument("dataset grid must be non-empty");
  if (n_points < 2) throw InvalidArgument("dataset FIDs need at least 2 points");
  if (fids.size() != n_voxels() * n_points) {
    throw InvalidArgument("dataset FID storage does not match nx*ny*n_points");
  }
  if (time_s.size() != n_points) throw InvalidArgument("dataset time axis length mismatch");
  if (time_s.front() != 0.0) throw InvalidArgument("dataset time axis must start at 0");
  for (std::size_t i = 1; i < time_s.size(); ++i) {
    if (!(time_s[i] > time_s[i - 1])) {
      throw InvalidArgument("dataset time axis must be strictly increasing");
    }
  }
  field.validate();
}

SpectroDataset make_dataset(int nx, int ny, std::size_t n_points, double dwell_s,
                            const FieldConstants& field, double te_s) {
  SpectroDataset ds;
  ds.nx = nx;
  ds.ny = ny;
  ds.n_points = n_points;
  ds.dwell_s = dwell_s;
  ds.te_s = te_s;
  ds.field = field;
  ds.time_s.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) ds.time_s[i] = static_cast<double>(i) * dwell_s;
  ds.fids.assign(ds.n_voxels() * n_points, cplx{});
  return ds;
}

void MapImage::validate() const {
  const auto n = static_cast<std::size_t>(nx) * ny;
  if (values.size() != n || valid.size() != n) {
    throw InvalidArgument("map storage does not match nx*ny");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i] && !std::isfinite(values[i])) {
      throw InvalidArgument("map value not finite at a valid voxel");
    }
  }
}

void Roi::validate(int nx, int ny) const {
  const auto n = static_cast<std::size_t>(nx) * ny;
  std::unordered_set<std::size_t> seen;
  for (std::size_t idx : indices) {
    if (idx >= n) {
      throw InvalidArgument("ROI '" + label + "' has voxel index " + std::to_string(idx) +
                            " outside the grid");
    }
    if (!seen.insert(idx).second) {
      throw InvalidArgument("ROI '" + label + "' lists voxel " + std::to_string(idx) + " twice");
    }
  }
}

}  // namespace mrsi

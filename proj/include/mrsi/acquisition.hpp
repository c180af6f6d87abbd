#pragma once

// Spiral trajectory design, the spatial/temporal interleaving schedule and
// analytic density compensation.

#include <vector>

#include "mrsi/model.hpp"

namespace mrsi {

struct SpiralArm {
  int arm_index = 0;
  std::vector<double> kx;  // 1/m
  std::vector<double> ky;  // 1/m
  std::vector<double> sample_times_s;

  std::size_t size() const noexcept { return kx.size(); }
};

struct AcquisitionSchedule {
  std::vector<SpiralArm> arms;
  std::vector<double> temporal_offsets_s;
  double spectral_epoch_s = 0.0;
  double readout_duration_s = 0.0;
  int spectral_repeats = 0;
};

struct DensityWeights {
  std::vector<double> w;
};

/// Archimedean arm k(tau) = k_max tau exp(i(2 pi n_turns tau + 2 pi arm/n_arms)),
/// tau uniform on [0, 1].
SpiralArm make_spiral_arm(const AcquisitionConfig& cfg, int arm_index);

/// Throws InvalidArgument when one readout does not fit in the spectral epoch.
AcquisitionSchedule make_schedule(const AcquisitionConfig& cfg);

/// Analytic weights proportional to |k| d|k|/dtau, scaled to the k-space area
/// each sample represents times the voxel area (so weights are dimensionless
/// and sum to the covered fraction of the Cartesian k-square, pi/4).
DensityWeights density_weights(const SpiralArm& arm, const AcquisitionConfig& cfg);

}  // namespace mrsi

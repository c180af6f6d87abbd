#include "mrsi/acquisition.hpp"

#include <cmath>
#include <sstream>

#include "mrsi/errors.hpp"

namespace mrsi {

SpiralArm make_spiral_arm(const AcquisitionConfig& cfg, int arm_index) {
  cfg.validate();
  if (arm_index < 0 || arm_index >= cfg.n_spatial_interleaves) {
    throw InvalidArgument("arm_index out of range");
  }
  const int n = cfg.resolved_samples_per_arm();
  const double kmax = cfg.k_max();
  const double turns = cfg.n_turns();
  const double rot = kTwoPi * arm_index / cfg.n_spatial_interleaves;

  SpiralArm arm;
  arm.arm_index = arm_index;
  arm.kx.resize(n);
  arm.ky.resize(n);
  arm.sample_times_s.resize(n);
  for (int s = 0; s < n; ++s) {
    const double tau = n > 1 ? static_cast<double>(s) / (n - 1) : 0.0;
    const double phi = kTwoPi * turns * tau + rot;
    arm.kx[s] = kmax * tau * std::cos(phi);
    arm.ky[s] = kmax * tau * std::sin(phi);
    arm.sample_times_s[s] = s * cfg.readout_dwell_s;
  }
  return arm;
}

AcquisitionSchedule make_schedule(const AcquisitionConfig& cfg) {
  cfg.validate();
  AcquisitionSchedule sched;
  sched.spectral_epoch_s = cfg.epoch_s();
  sched.spectral_repeats = cfg.spectral_repeats();
  sched.readout_duration_s = cfg.resolved_samples_per_arm() * cfg.readout_dwell_s;
  if (sched.readout_duration_s > sched.spectral_epoch_s * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "readout duration " << sched.readout_duration_s * 1e3 << " ms exceeds spectral epoch "
        << sched.spectral_epoch_s * 1e3 << " ms";
    throw InvalidArgument(msg.str());
  }
  sched.temporal_offsets_s.resize(cfg.n_temporal_interleaves);
  for (int j = 0; j < cfg.n_temporal_interleaves; ++j) {
    sched.temporal_offsets_s[j] = j * sched.spectral_epoch_s / cfg.n_temporal_interleaves;
  }
  sched.arms.reserve(cfg.n_spatial_interleaves);
  for (int a = 0; a < cfg.n_spatial_interleaves; ++a) sched.arms.push_back(make_spiral_arm(cfg, a));
  return sched;
}

DensityWeights density_weights(const SpiralArm& arm, const AcquisitionConfig& cfg) {
  const std::size_t n = arm.size();
  std::vector<double> radius(n);
  bool any_nonzero = false;
  for (std::size_t i = 0; i < n; ++i) {
    radius[i] = std::hypot(arm.kx[i], arm.ky[i]);
    any_nonzero = any_nonzero || radius[i] > 0.0;
  }
  if (n < 2 || !any_nonzero) throw InvalidArgument("degenerate spiral arm: no samples off the origin");

  // Area element of one sample: (radial gap between arms) x (arc length per
  // sample) = |k| |dk| * 2 pi / n_arms for an Archimedean interleave set.
  const double angular = kTwoPi / cfg.n_spatial_interleaves;
  const double voxel_area = cfg.voxel_m() * cfg.voxel_m();
  DensityWeights out;
  out.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    const double dr = (radius[hi] - radius[lo]) / static_cast<double>(hi - lo);
    out.w[i] = radius[i] * std::abs(dr) * angular * voxel_area;
  }
  // Samples at the origin have zero analytic area. Every arm starts there, so
  // they share the disc out to half the first nonzero radius.
  double r1 = 0.0;
  for (double r : radius) {
    if (r > 0.0) {
      r1 = r;
      break;
    }
  }
  const double centre = kPi * 0.25 * r1 * r1 * voxel_area / cfg.n_spatial_interleaves;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(radius[i] > 0.0)) out.w[i] = centre;
  }
  return out;
}

}  // namespace mrsi

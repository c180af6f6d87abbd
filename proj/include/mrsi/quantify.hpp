#pragma once

// Reference quantification: variable-projection least squares on the
// complex FID with a water / IMCL / EMCL Lorentzian model.

#include <span>
#include <string>
#include <vector>

#include "mrsi/model.hpp"

namespace mrsi {

struct LineSpec {
  std::string name;
  double prior_ppm = 0.0;
  double halfwidth_ppm = 0.0;  // search window around the prior
  double damping_min = 1.0;    // 1/s
  double damping_max = 200.0;  // 1/s
};

/// Line 0 is the reference (water). Its frequency may move by up to
/// global_shift_hz; the other lines sit at the water frequency plus an
/// offset confined to their own window.
struct PeakModel {
  std::vector<LineSpec> lines;
  double global_shift_hz = 60.0;

  void validate() const;
  static PeakModel muscle_default();
  std::size_t index_of(const std::string& name) const;
};

struct FitLine {
  std::string name;
  cplx amplitude;
  double freq_hz = 0.0;     // axis convention (offset below water reference)
  double damping = 0.0;     // 1/s
};

struct FitResult {
  std::vector<FitLine> lines;
  double residual_norm = 0.0;
  double initial_residual_norm = 0.0;  // best multi-start point
  double condition = 0.0;
  bool converged = false;
  bool ill_conditioned = false;
  int iterations = 0;

  const FitLine& line(const std::string& name) const;
};

struct FitOptions {
  int max_iterations = 200;
  double rel_tol = 1e-9;
  double condition_limit = 1e8;
  int refine_starts = 3;
};

/// Model s(t) = sum_k c_k exp((-i 2 pi f_k - d_k) t), t = n * dwell.
/// Throws EmptySignalError for an all-zero FID.
FitResult fit_voxel(std::span<const cplx> fid, double dwell_s, const PeakModel& model,
                    const FieldConstants& field, const FitOptions& opt = {});

/// 100 |c_imcl| / (|c_imcl| + |c_emcl|). Throws UndefinedRatioError when the
/// fit did not converge, is ill-conditioned, or both amplitudes are zero.
double imcl_percent(const FitResult& fit);
/// 100 (|c_imcl| + |c_emcl|) / (|c_imcl| + |c_emcl| + |c_water|).
double ff_percent(const FitResult& fit);

}  // namespace mrsi

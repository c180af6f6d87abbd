#pragma once

// Per-voxel spectral front end: the Fourier transform of the FID modulus
// (automatic phasing and frequency registration against the dominant water
// line) and the conventional magnitude spectrum.

#include <span>
#include <vector>

#include "mrsi/model.hpp"

namespace mrsi {

struct SpectralOptions {
  double lb_hz = 5.0;
  int zerofill = 2;  // 1, 2 or 4
  /// Subtract the mean of the last tail_fraction of |s| before transforming.
  bool baseline_tail = true;
  double tail_fraction = 0.10;

  void validate() const;
};

/// Non-negative half-axis magnitude spectrum of the FID modulus.
struct RegisteredSpectrum {
  std::vector<double> amplitudes;
  SpectralAxis axis;  // freq_hz >= 0 ascending, ppm descending
  double lb_hz = 0.0;
  int zerofill = 1;
  double dominance_ratio = 0.0;
};

/// Conventional magnitude spectrum on the full FFT-ordered axis.
struct ConventionalSpectrum {
  std::vector<double> amplitudes;
  SpectralAxis axis;  // freq_hz ascending over [-BW/2, BW/2)
};

/// Modulus route: m = |s| (rounded to single precision, the storage precision
/// of datasets, so that the result does not depend on the global phase),
/// tail-baseline subtraction, exponential apodization exp(-pi lb t),
/// zero-fill, real FFT, magnitude of the non-negative bins.
/// Throws EmptySignalError for an all-zero FID.
RegisteredSpectrum magnitude_fid_spectrum(std::span<const cplx> fid, double dwell_s,
                                          const SpectralOptions& opt,
                                          const FieldConstants& field);

/// Apodize, zero-fill, transform, magnitude. A component exp(-i 2 pi f t)
/// lands on the bin with freq_hz == f. Throws EmptySignalError for zero input.
ConventionalSpectrum conventional_magnitude_spectrum(std::span<const cplx> fid, double dwell_s,
                                                     double lb_hz, int zerofill,
                                                     const FieldConstants& field);

/// Spectral energy within [4.2, 5.2] ppm divided by total energy
/// (conventional spectrum, no apodization, no zero-fill).
double water_dominance_ratio(std::span<const cplx> fid, double dwell_s,
                             const FieldConstants& field);

/// Offset (axis convention) of the water line: peak of the conventional
/// spectrum within +/- search_ppm of the water reference, refined by
/// parabolic interpolation.
double registration_offset_hz(const ConventionalSpectrum& spec, const FieldConstants& field,
                              double search_ppm = 0.5);

}  // namespace mrsi

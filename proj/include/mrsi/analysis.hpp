#pragma once

// Cumulative-sum (CSA) curve over the methylene band, the apparent
// IMCL/EMCL content indicator, the CSA fat fraction, masks, maps and ROI
// summaries.

#include <string>
#include <vector>

#include "mrsi/model.hpp"
#include "mrsi/spectral.hpp"

namespace mrsi {

inline constexpr double kBandLoPpm = 1.10;
inline constexpr double kBandHiPpm = 1.70;
inline constexpr double kIndicatorPpm = 1.40;

struct CsaCurve {
  std::vector<double> ppm;     // ascending
  std::vector<double> values;  // cumulative, normalized to end at 1
  double band_energy = 0.0;    // sum of amplitudes in the band
  bool valid = false;
};

struct IndicatorResult {
  double indicator_pct = 0.0;
  double band_energy = 0.0;
  bool valid = false;
  std::string reason;
};

struct FractionResult {
  double percent = 0.0;
  bool valid = false;
};

/// Throws InvalidArgument when the band is not inside the axis.
CsaCurve csa_curve(const RegisteredSpectrum& spec, double lo_ppm = kBandLoPpm,
                   double hi_ppm = kBandHiPpm);

/// 100 x curve value at the bin closest to target_ppm (ties to the lower ppm).
IndicatorResult apparent_content_indicator(const RegisteredSpectrum& spec,
                                           double target_ppm = kIndicatorPpm,
                                           double lo_ppm = kBandLoPpm,
                                           double hi_ppm = kBandHiPpm);

struct Band {
  double lo_ppm = 0.0;
  double hi_ppm = 0.0;
};

inline constexpr Band kFfLipidBand{0.8, 2.3};
inline constexpr Band kFfWaterBand{4.2, 5.2};

/// Fat fraction from band sums of the conventional magnitude spectrum after
/// moving the measured water line (registration_offset_hz) to the reference.
FractionResult ff_from_csa(const ConventionalSpectrum& spec, double registration_offset_hz,
                           const FieldConstants& field, Band lipid = kFfLipidBand,
                           Band water = kFfWaterBand);

/// valid iff band energy >= fraction x median of the nonzero band energies.
MapImage lipid_mask(const MapImage& band_energy, double min_fraction = 0.1);

struct RoiStats {
  std::string label;
  double mean = 0.0;
  double sd = 0.0;  // sample SD; 0 when n == 1
  std::size_t n = 0;
};

/// Throws EmptyRoiError when no voxel of the ROI is valid in the map.
RoiStats roi_aggregate(const MapImage& map, const Roi& roi);

struct AnalysisOptions {
  SpectralOptions spectral;
  double band_lo_ppm = kBandLoPpm;
  double band_hi_ppm = kBandHiPpm;
  double indicator_ppm = kIndicatorPpm;
  double mask_fraction = 0.1;
  Band ff_lipid = kFfLipidBand;
  Band ff_water = kFfWaterBand;

  void validate() const;
};

struct AnalysisMaps {
  MapImage indicator;    // percent, valid where the lipid mask holds
  MapImage band_energy;  // CSA band sum, valid for nonzero voxels
  MapImage ff_csa;       // percent
  MapImage dominance;    // water dominance ratio
  MapImage mask;         // lipid mask (values 0/1)
};

/// Per-voxel spectral analysis over a whole dataset (parallel over voxels).
/// Zero voxels are left invalid in every map.
AnalysisMaps analyze_dataset(const SpectroDataset& ds, const AnalysisOptions& opt);

}  // namespace mrsi

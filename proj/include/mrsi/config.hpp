#pragma once

// JSON documents: pipeline configuration, phantom description and ROI sets.
// Schema violations throw ConfigError carrying the JSON pointer of the key.

#include <filesystem>
#include <string>
#include <vector>

#include "mrsi/analysis.hpp"
#include "mrsi/model.hpp"
#include "mrsi/phantom.hpp"
#include "mrsi/quantify.hpp"
#include "mrsi/recon.hpp"
#include "json.hpp"

namespace mrsi {

struct PipelineConfig {
  AcquisitionConfig acq;
  GriddingConfig gridding;
  AnalysisOptions analysis;
  PeakModel peaks = PeakModel::muscle_default();
  /// > 0: noise sigma per channel = |S(k=0, t=0)| / snr, overriding noise_sigma.
  double snr = 0.0;

  void validate() const;
};

PipelineConfig parse_config(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& cfg);

PhantomSpec parse_phantom(const nlohmann::json& j);
nlohmann::json phantom_to_json(const PhantomSpec& spec);

/// ROI set: {"rois": [{"label": ..., "voxels": [[x, y], ...]} or
/// {"label": ..., "shape": "rectangle"|"ellipse", "center_mm": [x, y], "half_mm": [a, b]}]}.
std::vector<Roi> parse_rois(const nlohmann::json& j, const AcquisitionConfig& acq);
nlohmann::json rois_to_json(const std::vector<Roi>& rois, int nx);

/// Reads and parses a JSON file; syntax errors become ConfigError("", ...).
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace mrsi

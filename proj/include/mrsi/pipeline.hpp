#pragma once

// Stage drivers behind the command-line tool. Each stage reads the previous
// stage's files, writes its own into an output directory and returns the
// paths it wrote.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrsi/config.hpp"

namespace mrsi {

namespace fs = std::filesystem;

struct StageResult {
  std::vector<fs::path> files;
  std::vector<std::string> warnings;
};

/// Noise sigma per channel for a target SNR: |S(k = 0, t = 0)| / snr.
double sigma_for_snr(const RawKSpace& raw, double snr);

/// Hash identifying a configuration: SHA-256 of its canonical JSON dump.
std::string config_hash(const PipelineConfig& cfg);

/// Phantom -> raw k-space (raw.bin/json) plus ground-truth maps and truth.csv.
StageResult simulate_stage(const PipelineConfig& cfg, const PhantomSpec& phantom,
                           const fs::path& out_dir);

/// raw -> per-voxel FIDs (dataset.bin/json). Configuration comes from the raw sidecar.
StageResult recon_stage(const fs::path& raw_stem, const fs::path& out_dir);

/// ROIs embedded in a raw or dataset sidecar (one per phantom region).
std::vector<Roi> sidecar_rois(const nlohmann::json& sidecar, int nx);

struct AnalyzeOptions {
  bool dump_spectra = false;
};

/// dataset -> indicator / FF / mask maps, ROI summaries and per-voxel ROI values.
StageResult analyze_stage(const fs::path& dataset_stem, const std::vector<Roi>& rois,
                          const fs::path& out_dir, const AnalyzeOptions& opt = {});

/// dataset -> per-line fit table and per-voxel IMCL% / FF% for ROI voxels
/// (all nonzero voxels when rois is empty).
StageResult quantify_stage(const fs::path& dataset_stem, const std::vector<Roi>& rois,
                           const fs::path& out_dir);

/// Group table, correlation matrix, regression and scatter data from the
/// analysis and quantification tables. Needs at least two ROIs with data.
StageResult stats_stage(const fs::path& analysis_dir, const fs::path& quantify_dir,
                        const fs::path& out_dir);

/// stats_stage outputs plus report.md. truth_csv (optional) adds the
/// measured-vs-truth bias section.
StageResult report_stage(const fs::path& analysis_dir, const fs::path& quantify_dir,
                         const fs::path& out_dir, const std::optional<fs::path>& truth_csv);

struct PipelineOptions {
  std::optional<fs::path> rois_path;
  bool dump_spectra = false;
  /// Recorded in the manifest; empty means the current UTC time, unless
  /// SOURCE_DATE_EPOCH is set.
  std::string timestamp;
};

/// All stages in subdirectories of out_dir plus manifest.json.
StageResult run_pipeline(const fs::path& config_path, const PipelineConfig& cfg,
                         const fs::path& phantom_path, const PhantomSpec& phantom,
                         const fs::path& out_dir, const PipelineOptions& opt);

}  // namespace mrsi

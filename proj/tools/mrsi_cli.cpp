// mrsi: simulate, reconstruct and analyze spiral MRSI of calf-muscle lipids.
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 numerical failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mrsi/config.hpp"
#include "mrsi/errors.hpp"
#include "mrsi/io.hpp"
#include "mrsi/parallel.hpp"
#include "mrsi/pipeline.hpp"

namespace {

using mrsi::fs::path;

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

mrsi::PipelineConfig load_config(const std::string& file, std::optional<std::uint64_t> seed) {
  auto cfg = mrsi::parse_config(mrsi::read_json_file(file));
  if (seed) cfg.acq.sim.seed = *seed;
  return cfg;
}

std::vector<mrsi::Roi> load_rois(const std::string& rois_file, const path& dataset_stem) {
  const auto side = nlohmann::json::parse(mrsi::io::read_text(dataset_stem.string() + ".json"));
  if (rois_file.empty()) return mrsi::sidecar_rois(side, side.at("nx").get<int>());
  const auto cfg = mrsi::parse_config(side.at("config"));
  return mrsi::parse_rois(mrsi::read_json_file(rois_file), cfg.acq);
}

void report(const mrsi::StageResult& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << r.files.size() << " files\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiral MRSI lipid mapping toolkit"};
  app.require_subcommand(1);
  unsigned workers = 0;
  app.add_option("--workers", workers, "Worker threads (0 = all cores)");

  std::string config, phantom, out, raw, dataset, rois, analysis_dir, quantify_dir, truth;
  std::optional<std::uint64_t> seed;
  bool dump_spectra = false;

  auto* sim = app.add_subcommand("simulate", "Phantom to raw spiral k-space");
  sim->add_option("--config", config, "Pipeline configuration JSON")->required();
  sim->add_option("--phantom", phantom, "Phantom JSON")->required();
  sim->add_option("--seed", seed, "Noise seed (overrides the config)");
  sim->add_option("--out", out, "Output directory")->required();

  auto* rec = app.add_subcommand("recon", "Raw k-space to per-voxel FIDs");
  rec->add_option("--raw", raw, "Raw stem (without .bin/.json)")->required();
  rec->add_option("--out", out, "Output directory")->required();

  auto* ana = app.add_subcommand("analyze", "Indicator, FF and mask maps");
  ana->add_option("--dataset", dataset, "Dataset stem (without .bin/.json)")->required();
  ana->add_option("--rois", rois, "ROI JSON (default: phantom regions from the sidecar)");
  ana->add_flag("--dump-spectra", dump_spectra, "Write per-voxel spectra as CSV");
  ana->add_option("--out", out, "Output directory")->required();

  auto* qua = app.add_subcommand("quantify", "Three-line fit of ROI voxels");
  qua->add_option("--dataset", dataset, "Dataset stem (without .bin/.json)")->required();
  qua->add_option("--rois", rois, "ROI JSON (default: phantom regions from the sidecar)");
  qua->add_option("--out", out, "Output directory")->required();

  auto* sta = app.add_subcommand("stats", "Group table and correlation matrix");
  sta->add_option("--analysis", analysis_dir, "analyze output directory")->required();
  sta->add_option("--quantify", quantify_dir,
                  "Directory holding roi_fits.csv (quantify output or an external table)")
      ->required();
  sta->add_option("--out", out, "Output directory")->required();

  auto* rep = app.add_subcommand("report", "Markdown report with tables and scatter data");
  rep->add_option("--analysis", analysis_dir, "analyze output directory")->required();
  rep->add_option("--quantify", quantify_dir, "Directory holding roi_fits.csv")->required();
  rep->add_option("--truth", truth, "truth.csv from simulate (optional)");
  rep->add_option("--out", out, "Output directory")->required();

  auto* pip = app.add_subcommand("pipeline", "All stages plus a manifest");
  pip->add_option("--config", config, "Pipeline configuration JSON")->required();
  pip->add_option("--phantom", phantom, "Phantom JSON")->required();
  pip->add_option("--rois", rois, "ROI JSON (default: phantom regions)");
  pip->add_option("--seed", seed, "Noise seed (overrides the config)");
  pip->add_flag("--dump-spectra", dump_spectra, "Write per-voxel spectra as CSV");
  pip->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    mrsi::set_worker_count(workers);
    if (*sim) {
      const auto cfg = load_config(config, seed);
      const auto ph = mrsi::parse_phantom(mrsi::read_json_file(phantom));
      report(mrsi::simulate_stage(cfg, ph, out));
    } else if (*rec) {
      report(mrsi::recon_stage(raw, out));
    } else if (*ana) {
      mrsi::AnalyzeOptions opt;
      opt.dump_spectra = dump_spectra;
      report(mrsi::analyze_stage(dataset, load_rois(rois, dataset), out, opt));
    } else if (*qua) {
      report(mrsi::quantify_stage(dataset, load_rois(rois, dataset), out));
    } else if (*sta) {
      report(mrsi::stats_stage(analysis_dir, quantify_dir, out));
    } else if (*rep) {
      std::optional<path> t;
      if (!truth.empty()) t = truth;
      report(mrsi::report_stage(analysis_dir, quantify_dir, out, t));
    } else if (*pip) {
      const auto cfg = load_config(config, seed);
      const auto ph = mrsi::parse_phantom(mrsi::read_json_file(phantom));
      mrsi::PipelineOptions opt;
      if (!rois.empty()) opt.rois_path = rois;
      opt.dump_spectra = dump_spectra;
      report(mrsi::run_pipeline(config, cfg, phantom, ph, out, opt));
    }
  } catch (const mrsi::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const mrsi::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

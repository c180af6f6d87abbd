#include "mrsi/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <limits>
#include <set>

#include "mrsi/errors.hpp"
#include "mrsi/io.hpp"
#include "mrsi/parallel.hpp"

namespace mrsi {

using nlohmann::json;

double sigma_for_snr(const RawKSpace& raw, double snr) {
  if (!(snr > 0.0)) throw InvalidArgument("snr must be positive");
  double peak = 0.0;
  for (int a = 0; a < raw.n_arms; ++a) peak = std::max(peak, std::abs(raw.at(a, 0, 0, 0)));
  if (!(peak > 0.0)) throw EmptySignalError("k-space center is zero; SNR is undefined");
  return peak / snr;
}

std::string config_hash(const PipelineConfig& cfg) {
  return io::sha256_hex(config_to_json(cfg).dump());
}

namespace {

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

std::string xy(std::size_t v, int nx) {
  return std::to_string(v % static_cast<std::size_t>(nx)) + "," +
         std::to_string(v / static_cast<std::size_t>(nx));
}

std::vector<fs::path> map_files(const fs::path& stem) {
  return {stem.string() + ".f32", stem.string() + ".json", stem.string() + ".pgm",
          stem.string() + ".csv"};
}

void append(std::vector<fs::path>& dst, const std::vector<fs::path>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

PipelineConfig config_from_sidecar(const json& side) {
  if (!side.contains("config")) throw ConfigError("/config", "sidecar carries no configuration");
  return parse_config(side.at("config"));
}

}  // namespace

StageResult simulate_stage(const PipelineConfig& cfg, const PhantomSpec& phantom,
                           const fs::path& out_dir) {
  cfg.validate();
  const auto& acq = cfg.acq;
  const PhantomGrid grid = rasterize_phantom(phantom, acq);
  const AcquisitionSchedule sched = make_schedule(acq);
  RawKSpace raw = forward_sample(grid, sched, acq);
  const double sigma = cfg.snr > 0.0 ? sigma_for_snr(raw, cfg.snr) : acq.sim.noise_sigma;
  raw = add_noise(std::move(raw), sigma, acq.sim.seed);

  const std::string hash = config_hash(cfg);
  json names = json::array();
  for (const auto& r : phantom.regions) names.push_back(r.name);
  const json extra{{"config", config_to_json(cfg)},
                   {"config_sha256", hash},
                   {"phantom", phantom_to_json(phantom)},
                   {"region_names", names},
                   {"region_of", grid.region_of}};
  StageResult res;
  const fs::path raw_stem = out_dir / "raw";
  io::write_raw(raw_stem, raw, extra);
  res.files = {raw_stem.string() + ".bin", raw_stem.string() + ".json"};

  const int n = grid.n;
  MapImage share(n, n), ff(n, n), angle(n, n);
  io::CsvWriter truth({"x", "y", "region", "imcl_share_pct", "ff_pct", "fiber_angle_deg",
                       "water_amp", "imcl_amp", "emcl_amp"},
                      hash);
  for (std::size_t v = 0; v < grid.voxels.size(); ++v) {
    const auto& t = grid.voxels[v];
    const double lipid = t.imcl_amp + t.emcl_amp;
    if (lipid + t.water_amp <= 0.0) continue;
    const int r = grid.region_of[v];
    share.values[v] = 100.0 * t.true_imcl_share();
    share.valid[v] = lipid > 0.0;
    ff.values[v] = 100.0 * t.true_fat_fraction();
    ff.valid[v] = 1;
    angle.values[v] = t.fiber_angle_rad * 180.0 / kPi;
    angle.valid[v] = 1;
    truth.row({std::to_string(v % n), std::to_string(v / n),
               r >= 0 ? phantom.regions[static_cast<std::size_t>(r)].name : "background",
               lipid > 0.0 ? io::fmt(share.values[v]) : "nan", io::fmt(ff.values[v]),
               io::fmt(angle.values[v]), io::fmt(t.water_amp), io::fmt(t.imcl_amp),
               io::fmt(t.emcl_amp)});
  }
  io::write_map(out_dir / "truth_imcl_share", share, hash, 0.0, 100.0);
  io::write_map(out_dir / "truth_ff", ff, hash, 0.0, 100.0);
  io::write_map(out_dir / "truth_fiber_angle", angle, hash, 0.0, 90.0);
  truth.save(out_dir / "truth.csv");
  append(res.files, map_files(out_dir / "truth_imcl_share"));
  append(res.files, map_files(out_dir / "truth_ff"));
  append(res.files, map_files(out_dir / "truth_fiber_angle"));
  res.files.push_back(out_dir / "truth.csv");
  return res;
}

StageResult recon_stage(const fs::path& raw_stem, const fs::path& out_dir) {
  json side;
  const RawKSpace raw = io::read_raw(raw_stem, &side);
  const PipelineConfig cfg = config_from_sidecar(side);
  const auto& acq = cfg.acq;
  if (raw.n_arms != acq.n_spatial_interleaves || raw.n_temporal != acq.n_temporal_interleaves ||
      raw.n_spectral != acq.spectral_repeats() || raw.n_samples != acq.resolved_samples_per_arm()) {
    throw InvalidArgument("raw dimensions do not match the configuration in its sidecar");
  }
  ReconResult rec = reconstruct(raw, acq, cfg.gridding);
  rec.dataset.te_s = acq.te_s;

  json extra{{"config", side.at("config")},
             {"config_sha256", side.value("config_sha256", config_hash(cfg))},
             {"raw_sha256", side.value("data_sha256", "")},
             {"gridding",
              {{"oversampling", rec.gridding.oversampling},
               {"kernel_width", rec.gridding.kernel_width},
               {"beta", rec.gridding.beta},
               {"oversampled_grid", rec.oversampled_grid}}}};
  if (side.contains("region_names")) extra["region_names"] = side["region_names"];
  if (side.contains("region_of")) extra["region_of"] = side["region_of"];
  const fs::path stem = out_dir / "dataset";
  io::write_dataset(stem, rec.dataset, extra);
  return {{stem.string() + ".bin", stem.string() + ".json"}, {}};
}

std::vector<Roi> sidecar_rois(const json& side, int nx) {
  std::vector<Roi> rois;
  if (!side.contains("region_names") || !side.contains("region_of")) return rois;
  const auto names = side.at("region_names").get<std::vector<std::string>>();
  const auto region_of = side.at("region_of").get<std::vector<int>>();
  rois.resize(names.size());
  for (std::size_t r = 0; r < names.size(); ++r) rois[r].label = names[r];
  for (std::size_t v = 0; v < region_of.size(); ++v) {
    if (region_of[v] >= 0 && static_cast<std::size_t>(region_of[v]) < names.size()) {
      rois[static_cast<std::size_t>(region_of[v])].indices.push_back(v);
    }
  }
  for (auto& roi : rois) roi.validate(nx, static_cast<int>(region_of.size()) / std::max(nx, 1));
  return rois;
}

StageResult analyze_stage(const fs::path& dataset_stem, const std::vector<Roi>& rois,
                          const fs::path& out_dir, const AnalyzeOptions& opt) {
  json side;
  const SpectroDataset ds = io::read_dataset(dataset_stem, &side);
  const PipelineConfig cfg = config_from_sidecar(side);
  const std::string hash = side.value("config_sha256", config_hash(cfg));
  for (const auto& roi : rois) roi.validate(ds.nx, ds.ny);

  const AnalysisMaps maps = analyze_dataset(ds, cfg.analysis);
  StageResult res;
  double emax = 0.0;
  for (std::size_t v = 0; v < maps.band_energy.size(); ++v) {
    if (maps.band_energy.valid[v]) emax = std::max(emax, maps.band_energy.values[v]);
  }
  const std::pair<const char*, std::pair<const MapImage*, std::pair<double, double>>> outputs[] = {
      {"indicator", {&maps.indicator, {0.0, 100.0}}},
      {"ff_csa", {&maps.ff_csa, {0.0, 100.0}}},
      {"band_energy", {&maps.band_energy, {0.0, emax}}},
      {"dominance", {&maps.dominance, {0.0, 1.0}}},
      {"lipid_mask", {&maps.mask, {0.0, 1.0}}},
  };
  for (const auto& [name, m] : outputs) {
    io::write_map(out_dir / name, *m.first, hash, m.second.first, m.second.second);
    append(res.files, map_files(out_dir / name));
  }

  io::CsvWriter summary({"label", "metric", "mean", "sd", "n"}, hash);
  io::CsvWriter values({"label", "x", "y", "indicator_pct", "ff_csa_pct"}, hash);
  json skipped = json::array();
  for (const auto& roi : rois) {
    RoiStats ind;
    try {
      ind = roi_aggregate(maps.indicator, roi);
    } catch (const EmptyRoiError&) {
      res.warnings.push_back("ROI '" + roi.label + "' has no valid voxels; skipped");
      skipped.push_back(roi.label);
      continue;
    }
    summary.row({roi.label, "indicator_pct", io::fmt(ind.mean), io::fmt(ind.sd), std::to_string(ind.n)});
    try {
      const RoiStats f = roi_aggregate(maps.ff_csa, roi);
      summary.row({roi.label, "ff_csa_pct", io::fmt(f.mean), io::fmt(f.sd), std::to_string(f.n)});
    } catch (const EmptyRoiError&) {
    }
    std::vector<std::size_t> idx = roi.indices;
    std::sort(idx.begin(), idx.end());
    for (auto v : idx) {
      if (!maps.indicator.valid[v]) continue;
      values.row({roi.label, std::to_string(v % ds.nx), std::to_string(v / ds.nx),
                  io::fmt(maps.indicator.values[v]),
                  maps.ff_csa.valid[v] ? io::fmt(maps.ff_csa.values[v]) : "nan"});
    }
  }
  summary.save(out_dir / "roi_summary.csv");
  values.save(out_dir / "roi_values.csv");
  res.files.push_back(out_dir / "roi_summary.csv");
  res.files.push_back(out_dir / "roi_values.csv");

  if (opt.dump_spectra) {
    std::set<std::size_t> voxels;
    if (rois.empty()) {
      for (std::size_t v = 0; v < maps.indicator.size(); ++v) {
        if (maps.indicator.valid[v]) voxels.insert(v);
      }
    } else {
      for (const auto& roi : rois) {
        for (auto v : roi.indices) {
          if (maps.indicator.valid[v]) voxels.insert(v);
        }
      }
    }
    for (auto v : voxels) {
      const auto spec = magnitude_fid_spectrum(ds.fid(v), ds.dwell_s, cfg.analysis.spectral, ds.field);
      io::CsvWriter csv({"ppm", "amplitude"}, hash);
      for (std::size_t k = 0; k < spec.amplitudes.size(); ++k) {
        csv.row({io::fmt(spec.axis.ppm[k]), io::fmt(spec.amplitudes[k])});
      }
      const fs::path p = out_dir / "spectra" /
                         ("x" + std::to_string(v % ds.nx) + "_y" + std::to_string(v / ds.nx) + ".csv");
      csv.save(p);
      res.files.push_back(p);
    }
  }

  io::write_json(out_dir / "analysis.json",
                 json{{"config_sha256", hash},
                      {"dataset_sha256", side.value("data_sha256", "")},
                      {"rois", [&] {
                         json a = json::array();
                         for (const auto& r : rois) a.push_back(r.label);
                         return a;
                       }()},
                      {"skipped_rois", skipped},
                      {"warnings", res.warnings},
                      {"tool_version", io::kToolVersion}});
  res.files.push_back(out_dir / "analysis.json");
  return res;
}

StageResult quantify_stage(const fs::path& dataset_stem, const std::vector<Roi>& rois,
                           const fs::path& out_dir) {
  json side;
  const SpectroDataset ds = io::read_dataset(dataset_stem, &side);
  const PipelineConfig cfg = config_from_sidecar(side);
  const std::string hash = side.value("config_sha256", config_hash(cfg));

  // (label, voxel) pairs in a fixed order; each distinct voxel is fitted once
  std::vector<std::pair<std::string, std::size_t>> members;
  if (rois.empty()) {
    for (std::size_t v = 0; v < ds.n_voxels(); ++v) {
      const auto f = ds.fid(v);
      if (std::any_of(f.begin(), f.end(), [](const cplx& z) { return z != cplx{}; })) {
        members.emplace_back("all", v);
      }
    }
  } else {
    for (const auto& roi : rois) {
      roi.validate(ds.nx, ds.ny);
      std::vector<std::size_t> idx = roi.indices;
      std::sort(idx.begin(), idx.end());
      for (auto v : idx) members.emplace_back(roi.label, v);
    }
  }
  std::vector<std::size_t> voxels;
  for (const auto& m : members) voxels.push_back(m.second);
  std::sort(voxels.begin(), voxels.end());
  voxels.erase(std::unique(voxels.begin(), voxels.end()), voxels.end());

  struct Outcome {
    FitResult fit;
    bool ok = false;
    std::string error;
  };
  std::vector<Outcome> out(voxels.size());
  parallel_for(voxels.size(), [&](std::size_t i) {
    try {
      out[i].fit = fit_voxel(ds.fid(voxels[i]), ds.dwell_s, cfg.peaks, ds.field);
      out[i].ok = true;
    } catch (const NumericalError& e) {
      out[i].error = e.what();
    }
  });

  MapImage imcl(ds.nx, ds.ny), ff(ds.nx, ds.ny);
  io::CsvWriter fits({"x", "y", "line", "amp_re", "amp_im", "amp_abs", "freq_hz", "ppm",
                      "damping_per_s", "converged", "ill_conditioned", "condition",
                      "residual_norm"},
                     hash);
  std::vector<double> imcl_v(voxels.size(), nan()), ff_v(voxels.size(), nan());
  for (std::size_t i = 0; i < voxels.size(); ++i) {
    const auto v = voxels[i];
    if (!out[i].ok) continue;
    const FitResult& f = out[i].fit;
    for (const auto& l : f.lines) {
      fits.row({std::to_string(v % ds.nx), std::to_string(v / ds.nx), l.name,
                io::fmt(l.amplitude.real()), io::fmt(l.amplitude.imag()),
                io::fmt(std::abs(l.amplitude)), io::fmt(l.freq_hz),
                io::fmt(offset_hz_to_ppm(l.freq_hz, ds.field)), io::fmt(l.damping),
                f.converged ? "1" : "0", f.ill_conditioned ? "1" : "0", io::fmt(f.condition),
                io::fmt(f.residual_norm)});
    }
    try {
      imcl_v[i] = imcl_percent(f);
      imcl.values[v] = imcl_v[i];
      imcl.valid[v] = 1;
    } catch (const UndefinedRatioError&) {
    }
    try {
      ff_v[i] = ff_percent(f);
      ff.values[v] = ff_v[i];
      ff.valid[v] = 1;
    } catch (const UndefinedRatioError&) {
    }
  }

  StageResult res;
  io::CsvWriter roi_fits({"label", "x", "y", "imcl_pct", "ff_fit_pct"}, hash);
  for (const auto& [label, v] : members) {
    const auto i = static_cast<std::size_t>(std::lower_bound(voxels.begin(), voxels.end(), v) - voxels.begin());
    if (!out[i].ok) {
      res.warnings.push_back("voxel " + xy(v, ds.nx) + ": " + out[i].error);
      continue;
    }
    roi_fits.row({label, std::to_string(v % ds.nx), std::to_string(v / ds.nx),
                  io::fmt(imcl_v[i]), io::fmt(ff_v[i])});
  }
  fits.save(out_dir / "fits.csv");
  roi_fits.save(out_dir / "roi_fits.csv");
  io::write_map(out_dir / "imcl_fit", imcl, hash, 0.0, 100.0);
  io::write_map(out_dir / "ff_fit", ff, hash, 0.0, 100.0);
  res.files = {out_dir / "fits.csv", out_dir / "roi_fits.csv"};
  append(res.files, map_files(out_dir / "imcl_fit"));
  append(res.files, map_files(out_dir / "ff_fit"));
  return res;
}

namespace {

std::string utc_timestamp() {
  std::time_t t = 0;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
    t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json stage_manifest(const StageResult& r, const fs::path& root) {
  json files = json::array();
  std::vector<fs::path> sorted = r.files;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& p : sorted) {
    files.push_back({{"path", fs::relative(p, root).generic_string()},
                     {"sha256", io::sha256_file(p)}});
  }
  return json{{"files", files}, {"warnings", r.warnings}};
}

}  // namespace

StageResult run_pipeline(const fs::path& config_path, const PipelineConfig& cfg,
                         const fs::path& phantom_path, const PhantomSpec& phantom,
                         const fs::path& out_dir, const PipelineOptions& opt) {
  fs::create_directories(out_dir);
  const fs::path sim_dir = out_dir / "simulate", rec_dir = out_dir / "recon",
                 ana_dir = out_dir / "analyze", q_dir = out_dir / "quantify",
                 rep_dir = out_dir / "report";
  const std::string started = opt.timestamp.empty() ? utc_timestamp() : opt.timestamp;

  const StageResult sim = simulate_stage(cfg, phantom, sim_dir);
  const StageResult rec = recon_stage(sim_dir / "raw", rec_dir);

  std::vector<Roi> rois;
  if (opt.rois_path) {
    rois = parse_rois(read_json_file(*opt.rois_path), cfg.acq);
  } else {
    rois = sidecar_rois(json::parse(io::read_text(rec_dir / "dataset.json")), cfg.acq.grid_n);
  }
  const StageResult ana = analyze_stage(rec_dir / "dataset", rois, ana_dir, {opt.dump_spectra});
  const StageResult q = quantify_stage(rec_dir / "dataset", rois, q_dir);
  const StageResult rep = report_stage(ana_dir, q_dir, rep_dir, sim_dir / "truth.csv");

  json manifest{{"tool_version", io::kToolVersion},
                {"config_path", config_path.generic_string()},
                {"config_sha256", config_hash(cfg)},
                {"phantom_path", phantom_path.generic_string()},
                {"phantom_sha256", io::sha256_hex(phantom_to_json(phantom).dump())},
                {"timestamps", {{"started", started}}},
                {"stages",
                 {{"simulate", stage_manifest(sim, out_dir)},
                  {"recon", stage_manifest(rec, out_dir)},
                  {"analyze", stage_manifest(ana, out_dir)},
                  {"quantify", stage_manifest(q, out_dir)},
                  {"report", stage_manifest(rep, out_dir)}}}};
  io::write_json(out_dir / "manifest.json", manifest);

  StageResult all;
  for (const auto* r : {&sim, &rec, &ana, &q, &rep}) {
    append(all.files, r->files);
    all.warnings.insert(all.warnings.end(), r->warnings.begin(), r->warnings.end());
  }
  all.files.push_back(out_dir / "manifest.json");
  return all;
}

}  // namespace mrsi

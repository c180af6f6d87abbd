#include "mrsi/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mrsi/errors.hpp"

namespace mrsi {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering its pointer so every error names the
// offending key. Keys not consumed by the time check_unknown() runs are errors.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  std::string path_of(const std::string& key) const { return path_ + "/" + key; }

  const json& child(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path_of(key), "required key is missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = child(key);
    if (!v.is_number()) throw ConfigError(path_of(key), "expected a number");
    return v.get<double>();
  }
  void number(const std::string& key, double& out) {
    if (has(key)) out = number(key);
  }
  int integer(const std::string& key) {
    const json& v = child(key);
    if (!v.is_number_integer()) throw ConfigError(path_of(key), "expected an integer");
    const auto x = v.get<long long>();
    if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(path_of(key), "out of range");
    return static_cast<int>(x);
  }
  void integer(const std::string& key, int& out) {
    if (has(key)) out = integer(key);
  }
  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = child(key);
    if (!v.is_boolean()) throw ConfigError(path_of(key), "expected true or false");
    out = v.get<bool>();
  }
  std::string string(const std::string& key) {
    const json& v = child(key);
    if (!v.is_string()) throw ConfigError(path_of(key), "expected a string");
    return v.get<std::string>();
  }
  std::pair<double, double> pair(const std::string& key) {
    const json& v = child(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError(path_of(key), "expected [number, number]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
  }

  void check_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path_of(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Runs a validate() and re-throws its message against a JSON pointer.
template <class F>
void validate_at(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(path.empty() ? "/" : path, e.what());
  }
}

TissueParams parse_tissue(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  TissueParams t;
  r.number("water_amp", t.water_amp);
  r.number("water_t2s_s", t.water_t2s_s);
  r.number("imcl_amp", t.imcl_amp);
  r.number("emcl_amp", t.emcl_amp);
  r.number("lipid_t2s_s", t.lipid_t2s_s);
  if (r.has("fiber_angle_deg")) t.fiber_angle_rad = r.number("fiber_angle_deg") * kPi / 180.0;
  r.number("b0_offset_hz", t.b0_offset_hz);
  r.number("phase0_rad", t.phase0_rad);
  r.number("methyl_fraction", t.methyl_fraction);
  r.check_unknown();
  validate_at(path, [&] { t.validate(); });
  return t;
}

json tissue_to_json(const TissueParams& t) {
  return json{{"water_amp", t.water_amp},
              {"water_t2s_s", t.water_t2s_s},
              {"imcl_amp", t.imcl_amp},
              {"emcl_amp", t.emcl_amp},
              {"lipid_t2s_s", t.lipid_t2s_s},
              {"fiber_angle_deg", t.fiber_angle_rad * 180.0 / kPi},
              {"b0_offset_hz", t.b0_offset_hz},
              {"phase0_rad", t.phase0_rad},
              {"methyl_fraction", t.methyl_fraction}};
}

Band parse_band(ObjectReader& r, const std::string& key, Band def) {
  if (!r.has(key)) return def;
  const auto [lo, hi] = r.pair(key);
  if (!(lo < hi)) throw ConfigError(r.path_of(key), "band needs lo < hi");
  return {lo, hi};
}

Shape parse_shape(ObjectReader& r, const std::string& key) {
  const std::string s = r.string(key);
  if (s == "rectangle") return Shape::Rectangle;
  if (s == "ellipse") return Shape::Ellipse;
  throw ConfigError(r.path_of(key), "expected \"rectangle\" or \"ellipse\"");
}

}  // namespace

void PipelineConfig::validate() const {
  acq.validate();
  gridding.validate();
  analysis.validate();
  peaks.validate();
  if (!(snr >= 0.0)) throw InvalidArgument("snr must be >= 0");
}

PipelineConfig parse_config(const json& j) {
  PipelineConfig cfg;
  ObjectReader r(j, "");
  auto& a = cfg.acq;
  a.fov_mm = r.number("fov_mm");
  a.grid_n = r.integer("grid_n");
  a.n_spatial_interleaves = r.integer("n_spatial_interleaves");
  a.n_temporal_interleaves = r.integer("n_temporal_interleaves");
  a.n_spectral_points = r.integer("n_spectral_points");
  a.spectral_dwell_s = r.number("spectral_dwell_s");
  r.number("slab_mm", a.slab_mm);
  r.number("tr_s", a.tr_s);
  r.number("te_s", a.te_s);
  r.integer("samples_per_arm", a.samples_per_arm);
  r.number("readout_dwell_s", a.readout_dwell_s);
  r.number("larmor_mhz", a.field.larmor_mhz);
  r.number("water_ref_ppm", a.field.water_ref_ppm);

  if (r.has("simulation")) {
    ObjectReader s(r.child("simulation"), "/simulation");
    s.boolean("freeze_readout_time", a.sim.freeze_readout_time);
    s.boolean("include_methyl", a.sim.include_methyl);
    s.number("noise_sigma", a.sim.noise_sigma);
    s.number("snr", cfg.snr);
    if (s.has("seed")) {
      const json& v = s.child("seed");
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError("/simulation/seed", "expected a non-negative integer");
      }
      a.sim.seed = v.get<std::uint64_t>();
    }
    s.check_unknown();
    if (!(cfg.snr >= 0.0)) throw ConfigError("/simulation/snr", "must be >= 0");
  }
  if (r.has("gridding")) {
    ObjectReader g(r.child("gridding"), "/gridding");
    g.number("oversampling", cfg.gridding.oversampling);
    g.number("kernel_width", cfg.gridding.kernel_width);
    g.number("beta", cfg.gridding.beta);
    g.check_unknown();
    validate_at("/gridding", [&] { cfg.gridding.validate(); });
  }
  if (r.has("processing")) {
    ObjectReader p(r.child("processing"), "/processing");
    auto& o = cfg.analysis;
    p.number("lb_hz", o.spectral.lb_hz);
    p.integer("zerofill", o.spectral.zerofill);
    p.boolean("baseline_tail", o.spectral.baseline_tail);
    p.number("tail_fraction", o.spectral.tail_fraction);
    const Band band = parse_band(p, "indicator_band_ppm", {o.band_lo_ppm, o.band_hi_ppm});
    o.band_lo_ppm = band.lo_ppm;
    o.band_hi_ppm = band.hi_ppm;
    p.number("indicator_ppm", o.indicator_ppm);
    p.number("mask_fraction", o.mask_fraction);
    o.ff_lipid = parse_band(p, "ff_lipid_band_ppm", o.ff_lipid);
    o.ff_water = parse_band(p, "ff_water_band_ppm", o.ff_water);
    p.check_unknown();
    validate_at("/processing", [&] { o.validate(); });
  }
  if (r.has("quantify")) {
    ObjectReader q(r.child("quantify"), "/quantify");
    q.number("global_shift_hz", cfg.peaks.global_shift_hz);
    if (q.has("emcl_halfwidth_ppm")) {
      cfg.peaks.lines[cfg.peaks.index_of("emcl")].halfwidth_ppm = q.number("emcl_halfwidth_ppm");
    }
    if (q.has("imcl_halfwidth_ppm")) {
      cfg.peaks.lines[cfg.peaks.index_of("imcl")].halfwidth_ppm = q.number("imcl_halfwidth_ppm");
    }
    q.check_unknown();
    validate_at("/quantify", [&] { cfg.peaks.validate(); });
  }
  r.check_unknown();
  validate_at("", [&] { cfg.acq.validate(); });
  validate_at("", [&] { (void)make_schedule(cfg.acq); });
  return cfg;
}

json config_to_json(const PipelineConfig& cfg) {
  const auto& a = cfg.acq;
  const auto& o = cfg.analysis;
  return json{
      {"fov_mm", a.fov_mm},
      {"grid_n", a.grid_n},
      {"n_spatial_interleaves", a.n_spatial_interleaves},
      {"n_temporal_interleaves", a.n_temporal_interleaves},
      {"n_spectral_points", a.n_spectral_points},
      {"spectral_dwell_s", a.spectral_dwell_s},
      {"slab_mm", a.slab_mm},
      {"tr_s", a.tr_s},
      {"te_s", a.te_s},
      {"samples_per_arm", a.resolved_samples_per_arm()},
      {"readout_dwell_s", a.readout_dwell_s},
      {"larmor_mhz", a.field.larmor_mhz},
      {"water_ref_ppm", a.field.water_ref_ppm},
      {"simulation",
       {{"freeze_readout_time", a.sim.freeze_readout_time},
        {"include_methyl", a.sim.include_methyl},
        {"noise_sigma", a.sim.noise_sigma},
        {"snr", cfg.snr},
        {"seed", a.sim.seed}}},
      {"gridding",
       {{"oversampling", cfg.gridding.oversampling},
        {"kernel_width", cfg.gridding.kernel_width},
        {"beta", cfg.gridding.resolved_beta()}}},
      {"processing",
       {{"lb_hz", o.spectral.lb_hz},
        {"zerofill", o.spectral.zerofill},
        {"baseline_tail", o.spectral.baseline_tail},
        {"tail_fraction", o.spectral.tail_fraction},
        {"indicator_band_ppm", {o.band_lo_ppm, o.band_hi_ppm}},
        {"indicator_ppm", o.indicator_ppm},
        {"mask_fraction", o.mask_fraction},
        {"ff_lipid_band_ppm", {o.ff_lipid.lo_ppm, o.ff_lipid.hi_ppm}},
        {"ff_water_band_ppm", {o.ff_water.lo_ppm, o.ff_water.hi_ppm}}}},
      {"quantify",
       {{"global_shift_hz", cfg.peaks.global_shift_hz},
        {"imcl_halfwidth_ppm", cfg.peaks.lines[cfg.peaks.index_of("imcl")].halfwidth_ppm},
        {"emcl_halfwidth_ppm", cfg.peaks.lines[cfg.peaks.index_of("emcl")].halfwidth_ppm}}},
  };
}

PhantomSpec parse_phantom(const json& j) {
  ObjectReader r(j, "");
  PhantomSpec spec;
  if (r.has("background")) spec.background = parse_tissue(r.child("background"), "/background");
  const json& regions = r.child("regions");
  if (!regions.is_array()) throw ConfigError("/regions", "expected an array");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const std::string path = "/regions/" + std::to_string(i);
    ObjectReader rr(regions[i], path);
    Region reg;
    reg.name = rr.string("name");
    reg.shape = parse_shape(rr, "shape");
    std::tie(reg.center_x_mm, reg.center_y_mm) = rr.pair("center_mm");
    std::tie(reg.half_x_mm, reg.half_y_mm) = rr.pair("half_mm");
    if (!(reg.half_x_mm > 0.0 && reg.half_y_mm > 0.0)) {
      throw ConfigError(path + "/half_mm", "half extents must be positive");
    }
    reg.tissue = parse_tissue(rr.child("tissue"), path + "/tissue");
    rr.check_unknown();
    spec.regions.push_back(std::move(reg));
  }
  r.check_unknown();
  return spec;
}

json phantom_to_json(const PhantomSpec& spec) {
  json regions = json::array();
  for (const auto& r : spec.regions) {
    regions.push_back({{"name", r.name},
                       {"shape", r.shape == Shape::Rectangle ? "rectangle" : "ellipse"},
                       {"center_mm", {r.center_x_mm, r.center_y_mm}},
                       {"half_mm", {r.half_x_mm, r.half_y_mm}},
                       {"tissue", tissue_to_json(r.tissue)}});
  }
  return json{{"background", tissue_to_json(spec.background)}, {"regions", regions}};
}

std::vector<Roi> parse_rois(const json& j, const AcquisitionConfig& acq) {
  ObjectReader r(j, "");
  const json& arr = r.child("rois");
  r.check_unknown();
  if (!arr.is_array()) throw ConfigError("/rois", "expected an array");
  const int n = acq.grid_n;
  std::vector<Roi> out;
  std::set<std::string> labels;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "/rois/" + std::to_string(i);
    ObjectReader rr(arr[i], path);
    Roi roi;
    roi.label = rr.string("label");
    if (!labels.insert(roi.label).second) throw ConfigError(path + "/label", "duplicate label");
    if (rr.has("voxels")) {
      const json& vox = rr.child("voxels");
      if (!vox.is_array()) throw ConfigError(path + "/voxels", "expected an array of [x, y]");
      for (std::size_t k = 0; k < vox.size(); ++k) {
        const json& v = vox[k];
        const std::string vp = path + "/voxels/" + std::to_string(k);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
            !v[1].is_number_integer()) {
          throw ConfigError(vp, "expected [x, y] integers");
        }
        const int x = v[0].get<int>(), y = v[1].get<int>();
        if (x < 0 || y < 0 || x >= n || y >= n) throw ConfigError(vp, "voxel outside the grid");
        roi.indices.push_back(static_cast<std::size_t>(y) * n + x);
      }
    } else {
      Region reg;
      reg.shape = parse_shape(rr, "shape");
      std::tie(reg.center_x_mm, reg.center_y_mm) = rr.pair("center_mm");
      std::tie(reg.half_x_mm, reg.half_y_mm) = rr.pair("half_mm");
      if (!(reg.half_x_mm > 0.0 && reg.half_y_mm > 0.0)) {
        throw ConfigError(path + "/half_mm", "half extents must be positive");
      }
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          if (reg.contains(voxel_center_m(x, acq) * 1e3, voxel_center_m(y, acq) * 1e3)) {
            roi.indices.push_back(static_cast<std::size_t>(y) * n + x);
          }
        }
      }
    }
    rr.check_unknown();
    validate_at(path, [&] { roi.validate(n, n); });
    out.push_back(std::move(roi));
  }
  return out;
}

json rois_to_json(const std::vector<Roi>& rois, int nx) {
  json arr = json::array();
  for (const auto& roi : rois) {
    json vox = json::array();
    for (auto i : roi.indices) vox.push_back({static_cast<int>(i % nx), static_cast<int>(i / nx)});
    arr.push_back({{"label", roi.label}, {"voxels", vox}});
  }
  return json{{"rois", arr}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", path.string() + ": " + e.what());
  }
}

}  // namespace mrsi

#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "mrsi/config.hpp"
#include "mrsi/errors.hpp"

using namespace mrsi;
using nlohmann::json;

namespace {

json load(const std::string& name) {
  return read_json_file(std::filesystem::path(MRSI_DATA_DIR) / name);
}

std::string error_path(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("shipped configuration files parse") {
  const auto cfg = parse_config(load("config.default.json"));
  CHECK(cfg.acq.grid_n == 64);
  CHECK(cfg.acq.n_spatial_interleaves == 22);
  CHECK(cfg.snr == 200.0);
  CHECK(cfg.gridding.oversampling == 1.5);
  CHECK(cfg.analysis.spectral.lb_hz == 5.0);
  CHECK(cfg.analysis.ff_lipid.lo_ppm == 0.8);
  const auto small = parse_config(load("config.small.json"));
  CHECK(small.acq.grid_n == 16);
  CHECK(small.acq.sim.seed == 7);
  // defaults fill what the file leaves out
  CHECK(small.acq.tr_s == 2.0);
  CHECK_NOTHROW(parse_phantom(load("phantom.calf.json")));
  const auto rois = parse_rois(load("rois.example.json"), small.acq);
  REQUIRE(rois.size() == 3);
  CHECK(rois[2].label == "corner");
  CHECK(rois[2].indices == std::vector<std::size_t>{0, 1, 16});
  CHECK_FALSE(rois[0].indices.empty());
}

TEST_CASE("configuration round trip") {
  const auto cfg = parse_config(load("config.default.json"));
  const json j = config_to_json(cfg);
  CHECK(config_to_json(parse_config(j)) == j);
  const auto ph = parse_phantom(load("phantom.calf.json"));
  const auto ph2 = parse_phantom(phantom_to_json(ph));
  REQUIRE(ph2.regions.size() == ph.regions.size());
  for (std::size_t i = 0; i < ph.regions.size(); ++i) {
    const auto &a = ph.regions[i], &b = ph2.regions[i];
    CHECK(a.name == b.name);
    CHECK(a.shape == b.shape);
    CHECK(a.center_x_mm == b.center_x_mm);
    CHECK(a.half_y_mm == b.half_y_mm);
    CHECK(a.tissue.imcl_amp == b.tissue.imcl_amp);
    // degrees in the file, radians in memory
    CHECK(a.tissue.fiber_angle_rad == doctest::Approx(b.tissue.fiber_angle_rad).epsilon(1e-15));
  }
  const auto small = parse_config(load("config.small.json"));
  const auto rois = parse_rois(load("rois.example.json"), small.acq);
  const auto back = parse_rois(rois_to_json(rois, small.acq.grid_n), small.acq);
  REQUIRE(back.size() == rois.size());
  for (std::size_t i = 0; i < rois.size(); ++i) {
    CHECK(back[i].label == rois[i].label);
    CHECK(back[i].indices == rois[i].indices);
  }
}

TEST_CASE("schema violations name the key") {
  json j = load("config.default.json");
  j.erase("fov_mm");
  CHECK(error_path(j) == "/fov_mm");
  j = load("config.default.json");
  j["gridding"]["colour"] = 1;
  CHECK(error_path(j) == "/gridding/colour");
  j = load("config.default.json");
  j["grid_n"] = "sixty-four";
  CHECK(error_path(j) == "/grid_n");
  j = load("config.default.json");
  j["processing"]["indicator_band_ppm"] = {1.7, 1.1};
  CHECK(error_path(j) == "/processing/indicator_band_ppm");
  j = load("config.default.json");
  j["simulation"]["snr"] = -1;
  CHECK(error_path(j) == "/simulation/snr");
  j = load("config.default.json");
  j["grid_n"] = 2.5;
  CHECK(error_path(j) == "/grid_n");
  // ConfigError is an InvalidArgument (exit code 2 in the CLI)
  CHECK_THROWS_AS(parse_config(json::array()), InvalidArgument);
}

TEST_CASE("ROI schema") {
  AcquisitionConfig acq;
  acq.grid_n = 8;
  CHECK_THROWS_AS(parse_rois(json::parse(R"({"rois":[{"label":"a","voxels":[[8,0]]}]})"), acq),
                  ConfigError);
  CHECK_THROWS_AS(parse_rois(json::parse(R"({"rois":[{"label":"a","voxels":[[1,1],[1,1]]}]})"), acq),
                  InvalidArgument);
  CHECK_THROWS_AS(parse_rois(json::parse(R"({"rois":[{"label":"a","voxels":[[0,0]]},
                                                    {"label":"a","voxels":[[1,0]]}]})"),
                             acq),
                  ConfigError);
  try {
    parse_rois(json::parse(R"({"rois":[{"label":"a","shape":"star","center_mm":[0,0],"half_mm":[1,1]}]})"),
               acq);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "/rois/0/shape");
  }
  // a rectangle covering the whole FOV takes every voxel, row-major
  const auto all = parse_rois(
      json::parse(R"({"rois":[{"label":"all","shape":"rectangle","center_mm":[0,0],"half_mm":[100,100]}]})"),
      acq);
  REQUIRE(all[0].indices.size() == 64);
  for (std::size_t i = 0; i < 64; ++i) CHECK(all[0].indices[i] == i);
}

TEST_CASE("malformed JSON file") {
  const auto p = std::filesystem::temp_directory_path() / "mrsi_bad.json";
  {
    std::ofstream(p) << "{ \"fov_mm\": ";
  }
  CHECK_THROWS_AS(read_json_file(p), ConfigError);
  CHECK_THROWS_AS(read_json_file(p.string() + ".missing"), InvalidArgument);
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "mrsi/errors.hpp"
#include "mrsi/recon.hpp"

using namespace mrsi;

namespace {

AcquisitionConfig small_config() {
  AcquisitionConfig c;
  c.grid_n = 16;
  c.n_spatial_interleaves = 6;
  c.n_temporal_interleaves = 2;
  c.n_spectral_points = 16;
  c.spectral_dwell_s = 1e-3;
  return c;
}

struct Setup {
  AcquisitionSchedule sched;
  std::vector<DensityWeights> w;
};

Setup setup(const AcquisitionConfig& cfg) {
  Setup s;
  s.sched = make_schedule(cfg);
  for (const auto& arm : s.sched.arms) s.w.push_back(density_weights(arm, cfg));
  return s;
}

}  // namespace

TEST_CASE("Kaiser-Bessel kernel") {
  const GriddingConfig g;
  CHECK(g.oversampled_width() == 6.0);
  CHECK(g.resolved_beta() == doctest::Approx(kPi * std::sqrt(std::pow(6.0 / 1.5 * 1.0, 2) - 0.8)));
  const KaiserBessel kb(6.0, g.resolved_beta());
  CHECK(kb(0.0) == doctest::Approx(1.0));
  CHECK(kb(3.0001) == 0.0);
  CHECK(kb(-3.5) == 0.0);
  CHECK(kb(0.7) == doctest::Approx(kb(-0.7)));
  // analytic transform against a fine Riemann sum
  for (double nu : {0.0, 0.1, 0.25, 0.4}) {
    double acc = 0.0;
    const int m = 20000;
    for (int i = 0; i < m; ++i) {
      const double u = -3.0 + (i + 0.5) * 6.0 / m;
      acc += kb(u) * std::cos(kTwoPi * nu * u) * 6.0 / m;
    }
    CHECK(kb.transform(nu) == doctest::Approx(acc).epsilon(1e-6));
  }
  GriddingConfig bad;
  bad.oversampling = 0.9;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = {};
  bad.kernel_width = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("gridding a single DC sample lays down the kernel") {
  const auto cfg = small_config();
  SpiralArm arm;
  arm.kx = {0.0};
  arm.ky = {0.0};
  arm.sample_times_s = {0.0};
  const GriddingConfig g;
  const std::vector<cplx> one{1.0};
  const auto k = grid_timepoint(one, {arm}, {DensityWeights{{1.0}}}, g, cfg);
  const KaiserBessel kb(g.oversampled_width(), g.resolved_beta());
  const int c = k.g / 2;
  for (int y = 0; y < k.g; ++y) {
    for (int x = 0; x < k.g; ++x) {
      const double expect = kb(x - c) * kb(y - c);
      CHECK(std::abs(k.data[static_cast<std::size_t>(y) * k.g + x] - expect) < 1e-15);
    }
  }
  // deapodized, the kernel footprint turns back into a flat image
  const auto img = ifft2_deapodize(k, g);
  const cplx ref = img.data[static_cast<std::size_t>(cfg.grid_n / 2) * cfg.grid_n + cfg.grid_n / 2];
  double ripple = 0.0;
  for (const auto& z : img.data) ripple = std::max(ripple, std::abs(z - ref) / std::abs(ref));
  CHECK(ripple < 1e-3);

  const std::vector<cplx> zero{0.0};
  const auto kz = grid_timepoint(zero, {arm}, {DensityWeights{{1.0}}}, g, cfg);
  for (const auto& z : kz.data) CHECK(z == cplx{});
  for (const auto& z : ifft2_deapodize(kz, g).data) CHECK(z == cplx{});
}

TEST_CASE("samples outside the grid are rejected with their indices") {
  const auto cfg = small_config();
  SpiralArm arm;
  arm.kx = {0.0, 10.0 * cfg.k_max()};
  arm.ky = {0.0, 0.0};
  arm.sample_times_s = {0.0, 1e-6};
  try {
    grid_timepoint(std::vector<cplx>{1.0, 1.0}, {arm}, {DensityWeights{{1.0, 1.0}}}, GriddingConfig{}, cfg);
    FAIL("expected rejection");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find(" 1") != std::string::npos);
  }
}

TEST_CASE("deapodization is linear") {
  const auto cfg = small_config();
  const GriddingConfig g;
  KGrid k;
  k.g = oversampled_size(g, cfg.grid_n);
  k.n = cfg.grid_n;
  k.data.resize(static_cast<std::size_t>(k.g) * k.g);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (auto& z : k.data) z = {nd(rng), nd(rng)};
  auto k2 = k;
  const cplx a(0.3, -1.7);
  for (auto& z : k2.data) z *= a;
  const auto i1 = ifft2_deapodize(k, g), i2 = ifft2_deapodize(k2, g);
  for (std::size_t i = 0; i < i1.data.size(); ++i) CHECK(std::abs(i2.data[i] - a * i1.data[i]) < 1e-9);
}

TEST_CASE("direct reconstruction special cases") {
  const auto cfg = small_config();
  SpiralArm arm;
  arm.kx = {0.0};
  arm.ky = {0.0};
  arm.sample_times_s = {0.0};
  const auto img = dft_oracle_recon(std::vector<cplx>{cplx(2.0, 1.0)}, {arm}, {DensityWeights{{0.5}}}, cfg);
  for (const auto& z : img.data) CHECK(std::abs(z - cplx(1.0, 0.5)) < 1e-15);
  const auto zero = dft_oracle_recon(std::vector<cplx>{0.0}, {arm}, {DensityWeights{{0.5}}}, cfg);
  for (const auto& z : zero.data) CHECK(z == cplx{});
}

TEST_CASE("gridding matches the direct sum on a uniform phantom") {
  const auto cfg = small_config();
  const auto s = setup(cfg);
  PhantomSpec uni;
  Region r{"u", Shape::Rectangle, 0, 0, 100, 100, {}};
  r.tissue.water_amp = 1.0;
  r.tissue.imcl_amp = 0.1;
  uni.regions = {r};
  const auto raw = forward_sample(rasterize_phantom(uni, cfg), s.sched, cfg);
  const Gridder gridder(s.sched.arms, s.w, GriddingConfig{}, cfg);
  for (int m : {0, 3}) {
    const auto slice = raw_slice(raw, 1, m);
    const auto img = ifft2_deapodize(gridder.grid(slice), GriddingConfig{});
    const auto ref = dft_oracle_recon(slice, s.sched.arms, s.w, cfg);
    CHECK(interior_nrmse(img, ref, 0.75) <= 0.02);
  }
}

TEST_CASE("uniform phantom reconstructs flat at the default trajectory") {
  AcquisitionConfig cfg;
  cfg.n_temporal_interleaves = 1;
  cfg.n_spectral_points = 2;
  cfg.spectral_dwell_s = 2.5e-3;
  cfg.sim.freeze_readout_time = true;
  const auto s = setup(cfg);
  PhantomSpec uni;
  Region r{"u", Shape::Rectangle, 0, 0, 100, 100, {}};
  r.tissue.water_amp = 1.0;
  uni.regions = {r};
  const auto raw = forward_sample(rasterize_phantom(uni, cfg), s.sched, cfg);
  const auto img = ifft2_deapodize(Gridder(s.sched.arms, s.w, GriddingConfig{}, cfg).grid(raw_slice(raw, 0, 0)),
                                   GriddingConfig{});
  const int n = cfg.grid_n;
  cplx mean{};
  int cnt = 0;
  for (int y = n / 4; y < 3 * n / 4; ++y) {
    for (int x = n / 4; x < 3 * n / 4; ++x) {
      mean += img.data[static_cast<std::size_t>(y) * n + x];
      ++cnt;
    }
  }
  mean /= double(cnt);
  double rms = 0.0;
  for (int y = n / 4; y < 3 * n / 4; ++y) {
    for (int x = n / 4; x < 3 * n / 4; ++x) rms += std::norm(img.data[static_cast<std::size_t>(y) * n + x] - mean);
  }
  CHECK(std::sqrt(rms / cnt) / std::abs(mean) < 0.02);
  // weights carry the voxel area, so the image is in voxel signal units
  CHECK(std::abs(mean - 1.0) < 0.01);
}

TEST_CASE("rotating the phantom by 90 degrees rotates the image") {
  auto cfg = small_config();
  cfg.n_spatial_interleaves = 8;  // a quarter turn maps the arm set onto itself
  const auto s = setup(cfg);
  PhantomGrid g;
  g.n = cfg.grid_n;
  g.voxels.resize(256);
  g.region_of.assign(256, 0);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // row 0 stays empty so that every voxel has a rotated partner
  for (std::size_t v = 16; v < 256; ++v) g.voxels[v].water_amp = u(rng) < 0.3 ? u(rng) : 0.0;
  // (x, y) -> (-y, x) about the centre index 8: x' = 16 - y, y' = x
  PhantomGrid rot = g;
  for (auto& v : rot.voxels) v = {};
  for (int y = 1; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      rot.voxels[static_cast<std::size_t>(x) * 16 + (16 - y)] = g.voxels[static_cast<std::size_t>(y) * 16 + x];
    }
  }
  const Gridder gridder(s.sched.arms, s.w, GriddingConfig{}, cfg);
  const auto ra = forward_sample(g, s.sched, cfg), rb = forward_sample(rot, s.sched, cfg);
  const auto ia = ifft2_deapodize(gridder.grid(raw_slice(ra, 0, 0)), GriddingConfig{});
  const auto ib = ifft2_deapodize(gridder.grid(raw_slice(rb, 0, 0)), GriddingConfig{});
  Image ia_rot = ia;
  for (auto& z : ia_rot.data) z = {};
  for (int y = 1; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      ia_rot.data[static_cast<std::size_t>(x) * 16 + (16 - y)] = ia.data[static_cast<std::size_t>(y) * 16 + x];
    }
  }
  CHECK(interior_nrmse(ia_rot, ib, 0.75) < 0.05);
}

TEST_CASE("temporal weaving") {
  auto cfg = small_config();
  cfg.n_temporal_interleaves = 1;
  cfg.n_spectral_points = 6;
  auto sched = make_schedule(cfg);
  ImageStack st;
  st.n = 2;
  for (int m = 0; m < 6; ++m) st.frames.push_back(Image{2, std::vector<cplx>(4, cplx(m, -m))});
  cfg.grid_n = 2;
  auto ds = assemble_voxel_fids({st}, sched, cfg);
  for (std::size_t v = 0; v < 4; ++v) {
    for (int m = 0; m < 6; ++m) CHECK(ds.fid(v)[m] == cplx(m, -m));
  }

  // T = 5 with constant images gives a constant FID at the fine dwell
  cfg = small_config();
  cfg.n_temporal_interleaves = 5;
  cfg.n_spectral_points = 12;
  cfg.spectral_dwell_s = 0.5e-3;
  sched = make_schedule(cfg);
  std::vector<ImageStack> stacks(5);
  for (int j = 0; j < 5; ++j) {
    stacks[j].n = 2;
    for (int m = 0; m < cfg.spectral_repeats(); ++m) {
      stacks[j].frames.push_back(Image{2, std::vector<cplx>(4, cplx(1.5, 0.5))});
    }
  }
  ds = assemble_voxel_fids(stacks, sched, cfg);
  CHECK(ds.n_points == 12);
  CHECK(ds.dwell_s == doctest::Approx(0.5e-3));
  for (const auto& z : ds.fids) CHECK(z == cplx(1.5, 0.5));

  // sample m T + j comes from interleaf j, repeat m
  for (int j = 0; j < 5; ++j) {
    for (int m = 0; m < cfg.spectral_repeats(); ++m) stacks[j].frames[m].data.assign(4, cplx(m * 5 + j, 0));
  }
  ds = assemble_voxel_fids(stacks, sched, cfg);
  for (int k = 0; k < 12; ++k) CHECK(ds.fid(2)[k] == cplx(k, 0));

  stacks[3].frames.pop_back();
  CHECK_THROWS_AS(assemble_voxel_fids(stacks, sched, cfg), InvalidArgument);
  stacks.pop_back();
  CHECK_THROWS_AS(assemble_voxel_fids(stacks, sched, cfg), InvalidArgument);
}

TEST_CASE("end-to-end voxel FID follows the generator") {
  auto cfg = small_config();
  cfg.sim.freeze_readout_time = true;
  cfg.n_spectral_points = 64;
  cfg.n_temporal_interleaves = 2;
  cfg.spectral_dwell_s = 0.5e-3;
  PhantomSpec uni;
  Region r{"u", Shape::Rectangle, 0, 0, 100, 100, {}};
  r.tissue.water_amp = 1.0;
  r.tissue.imcl_amp = 0.2;
  r.tissue.emcl_amp = 0.3;
  r.tissue.b0_offset_hz = 12.0;
  uni.regions = {r};
  const auto raw = forward_sample(rasterize_phantom(uni, cfg), make_schedule(cfg), cfg);
  const auto res = reconstruct(raw, cfg, GriddingConfig{});
  const auto& ds = res.dataset;
  CHECK(res.gridding.beta == doctest::Approx(GriddingConfig{}.resolved_beta()));
  const auto truth = synth_voxel_fid(r.tissue, ds.time_s, cfg.field);
  const auto fid = ds.fid(static_cast<std::size_t>(8) * 16 + 8);
  double err = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    err += std::norm(fid[i] - truth[i]);
    norm += std::norm(truth[i]);
  }
  CHECK(std::sqrt(err / norm) < 0.02);
}

TEST_CASE("weighted k-space energy tracks image energy") {
  auto cfg = small_config();
  cfg.sim.freeze_readout_time = true;
  const auto s = setup(cfg);
  PhantomSpec ph;
  Region r{"e", Shape::Ellipse, 10, -5, 50, 35, {}};
  r.tissue.water_amp = 1.0;
  ph.regions = {r};
  const auto raw = forward_sample(rasterize_phantom(ph, cfg), s.sched, cfg);
  const Gridder gridder(s.sched.arms, s.w, GriddingConfig{}, cfg);
  std::vector<double> ratio;
  for (int m = 0; m < raw.n_spectral; ++m) {
    const auto slice = raw_slice(raw, 0, m);
    double ek = 0.0, ei = 0.0;
    std::size_t j = 0;
    for (const auto& w : s.w) {
      for (double wj : w.w) ek += wj * std::norm(slice[j++]);
    }
    for (const auto& z : ifft2_deapodize(gridder.grid(slice), GriddingConfig{}).data) ei += std::norm(z);
    ratio.push_back(ek / ei);
  }
  for (double q : ratio) CHECK(q == doctest::Approx(ratio.front()).epsilon(0.01));
}

#include <cmath>

#include "doctest.h"
#include "mrsi/errors.hpp"
#include "mrsi/model.hpp"

using namespace mrsi;

TEST_CASE("ppm and offset conversions") {
  const FieldConstants f;
  CHECK(f.hz_per_ppm() == 123.25);
  CHECK(ppm_to_offset_hz(1.3, f) == doctest::Approx(419.05).epsilon(1e-12));
  CHECK(ppm_to_offset_hz(4.7, f) == 0.0);
  CHECK(ppm_to_offset_hz(1.5, f) == doctest::Approx(394.40).epsilon(1e-12));
  for (double ppm : {-3.0, 0.9, 1.3, 1.55, 4.7, 12.0}) {
    const double back = offset_hz_to_ppm(ppm_to_offset_hz(ppm, f), f);
    CHECK(std::abs(back - ppm) <= 1e-12 * std::max(1.0, std::abs(ppm)));
  }
}

TEST_CASE("field constants validate") {
  FieldConstants f;
  f.larmor_mhz = 0.0;
  CHECK_THROWS_AS(f.validate(), InvalidArgument);
  f = {};
  f.water_ref_ppm = 12.0;
  CHECK_THROWS_AS(f.validate(), InvalidArgument);
}

TEST_CASE("default spectral axis") {
  const auto ax = build_spectral_axis(1024, 0.5e-3, FieldConstants{});
  CHECK(ax.bandwidth_hz() == doctest::Approx(2000.0));
  REQUIRE(ax.freq_hz.size() == 1024);
  CHECK(ax.freq_hz.front() == doctest::Approx(-1000.0));
  CHECK(ax.freq_hz[512] == 0.0);
  CHECK(ax.ppm[512] == doctest::Approx(4.7));
  // 1000 / 123.25 = 8.11 ppm either side of water
  CHECK(ax.ppm.front() == doctest::Approx(4.7 + 1000.0 / 123.25));
  CHECK(ax.ppm.back() == doctest::Approx(4.7 - (1000.0 - 2000.0 / 1024) / 123.25));
  for (std::size_t i = 1; i < ax.n; ++i) {
    CHECK(ax.freq_hz[i] > ax.freq_hz[i - 1]);
    CHECK(ax.ppm[i] < ax.ppm[i - 1]);
  }
}

TEST_CASE("two-point axis and bad dwell") {
  const auto ax = build_spectral_axis(2, 1.0, FieldConstants{});
  REQUIRE(ax.freq_hz.size() == 2);
  CHECK(ax.freq_hz[0] == -0.5);
  CHECK(ax.freq_hz[1] == 0.0);
  CHECK_THROWS_AS(build_spectral_axis(16, 0.0, FieldConstants{}), InvalidArgument);
  CHECK_THROWS_AS(build_spectral_axis(16, -1e-3, FieldConstants{}), InvalidArgument);
  CHECK_THROWS_AS(build_spectral_axis(1, 1e-3, FieldConstants{}), InvalidArgument);
}

TEST_CASE("band indices") {
  const FieldConstants f;
  const auto ax = build_spectral_axis(1024, 0.5e-3, f);
  const auto idx = band_indices(ax, 1.1, 1.7);
  REQUIRE(!idx.empty());
  for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] == idx[i - 1] + 1);
  // enumerate bin centers directly
  std::size_t expected = 0;
  for (std::size_t k = 0; k < ax.n; ++k) {
    if (ax.ppm[k] >= 1.1 && ax.ppm[k] <= 1.7) ++expected;
  }
  CHECK(idx.size() == expected);
  CHECK(ax.freq_hz[idx.front()] >= 369.75 - 1e-9);
  CHECK(ax.freq_hz[idx.back()] <= 443.7 + 1e-9);
  CHECK(ax.freq_hz[idx.front()] == doctest::Approx(369.75).epsilon(0.01));

  const auto all = band_indices(ax, -100.0, 100.0);
  CHECK(all.size() == ax.n);

  const auto narrow = build_spectral_axis(64, 2e-3, f);  // 2.67 .. 6.73 ppm
  CHECK_THROWS_AS(band_indices(narrow, 9.0, 9.1), InvalidArgument);
  CHECK_THROWS_AS(band_indices(ax, 1.7, 1.1), InvalidArgument);

  // enlarging the band never removes indices
  const auto wider = band_indices(ax, 1.0, 1.8);
  for (auto i : idx) CHECK(std::find(wider.begin(), wider.end(), i) != wider.end());
}

TEST_CASE("acquisition config validation") {
  AcquisitionConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.k_max() == doctest::Approx(160.0));
  CHECK(c.n_turns() == doctest::Approx(16.0 / 11.0));
  CHECK(c.epoch_s() == doctest::Approx(2.5e-3));
  CHECK(c.spectral_repeats() == 205);
  c.grid_n = 48;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.fov_mm = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.spectral_dwell_s = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("dataset and map containers") {
  auto ds = make_dataset(4, 3, 128, 1e-3, FieldConstants{}, 0.002);
  CHECK(ds.n_voxels() == 12);
  CHECK(ds.fids.size() == 12 * 128);
  CHECK(ds.time_s.front() == 0.0);
  CHECK(ds.time_s[5] == doctest::Approx(5e-3));
  CHECK_NOTHROW(ds.validate());
  ds.fid(3)[7] = cplx(1.0, 2.0);
  CHECK(ds.fids[3 * 128 + 7] == cplx(1.0, 2.0));

  MapImage m(3, 2);
  m.values[0] = std::nan("");
  m.valid[0] = 1;
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
  m.valid[0] = 0;
  CHECK_NOTHROW(m.validate());

  Roi r{"a", {0, 1, 1}};
  CHECK_THROWS_AS(r.validate(3, 2), InvalidArgument);
  r.indices = {0, 6};
  CHECK_THROWS_AS(r.validate(3, 2), InvalidArgument);
  r.indices = {0, 5};
  CHECK_NOTHROW(r.validate(3, 2));
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nfsar/errors.hpp"
#include "nfsar/geometry.hpp"

using namespace nfsar;
using Catch::Approx;

TEST_CASE("boresight resolution at default parameters", "[geometry]") {
  SceneGeometry g;  // 10 GHz, 2 GHz, L = 2 m, R = 3 m
  const auto r = boresight_resolution(g);
  CHECK(r.azimuth_resolution_m == Approx(0.0225).epsilon(1e-3));
  CHECK(r.range_resolution_m == Approx(0.075).epsilon(1e-3));

  SECTION("azimuth resolution is linear in range") {
    auto far = g;
    far.center_range_m = 6.0;
    const auto rf = boresight_resolution(far);
    CHECK(rf.azimuth_resolution_m == Approx(2.0 * r.azimuth_resolution_m).epsilon(1e-12));
    CHECK(rf.range_resolution_m == r.range_resolution_m);
  }
  SECTION("range resolution follows c/2B") {
    auto wide = g;
    wide.bandwidth_hz = 20e9;
    wide.center_frequency_hz = 20e9;  // keep B < 2 f_c
    CHECK(boresight_resolution(wide).range_resolution_m == Approx(0.0075).epsilon(1e-3));
  }
}

TEST_CASE("geometry invariants are enforced", "[geometry]") {
  SceneGeometry g;
  g.bandwidth_hz = 2.0 * g.center_frequency_hz;
  CHECK_THROWS_AS(g.validate(), InvalidArgument);
  g = {};
  g.aperture_samples = 1;
  CHECK_THROWS_AS(g.validate(), InvalidArgument);
  g = {};
  g.center_range_m = -1.0;
  CHECK_THROWS_AS(boresight_resolution(g), InvalidArgument);
  CHECK_THROWS_AS(synthetic_angle(SceneGeometry{}, {0.0, 0.0}), InvalidArgument);
}

TEST_CASE("synthetic angle", "[geometry]") {
  SceneGeometry g;
  // Direct trigonometry: the aperture half-length 1 m seen from (0, y).
  const double at3 = 2.0 * std::atan(1.0 / 3.0);
  const double at15 = 2.0 * std::atan(2.0 / 3.0);
  CHECK(synthetic_angle(g, {0.0, 3.0}) == Approx(0.6435011087932844).epsilon(1e-14));
  CHECK(synthetic_angle(g, {0.0, 3.0}) == Approx(at3).epsilon(1e-14));
  CHECK(synthetic_angle(g, {0.0, 1.5}) == Approx(1.1760052070951352).epsilon(1e-14));
  CHECK(synthetic_angle(g, {0.0, 1.5}) == Approx(at15).epsilon(1e-14));
  CHECK(synthetic_angle(g, {0.0, 1.5}) > synthetic_angle(g, {0.0, 3.0}));
  CHECK(synthetic_angle(g, {0.0, 1e9}) < 1e-8);

  SECTION("mirror symmetry is exact") {
    for (double x : {0.01, 0.3, 1.7, 5.0})
      for (double y : {0.5, 2.0, 3.3, 10.0})
        CHECK(synthetic_angle(g, {x, y}) == synthetic_angle(g, {-x, y}));
  }
  SECTION("monotone decreasing in range on boresight") {
    double prev = synthetic_angle(g, {0.0, 0.1});
    for (double y = 0.2; y < 20.0; y += 0.1) {
      const double cur = synthetic_angle(g, {0.0, y});
      CHECK(cur < prev);
      CHECK(cur > 0.0);
      CHECK(cur < kPi);
      prev = cur;
    }
  }
}

TEST_CASE("view angle", "[geometry]") {
  SceneGeometry g;
  CHECK(view_angle(g, {0.0, 3.0}) == Approx(kPi / 2));
  CHECK(view_angle(g, {3.0, 3.0}) == Approx(kPi / 4));
  CHECK(view_angle(g, {-3.0, 3.0}) == Approx(3.0 * kPi / 4));
}

TEST_CASE("boresight formula against the subtended-angle view", "[geometry]") {
  // lambda R / 2L == lambda / (4 tan(dtheta/2)) exactly at boresight, so the
  // small-angle form lambda / (2 dtheta) deviates by ~dtheta^2 / 12.
  SceneGeometry g;
  for (double range = 1.5; range < 40.0; range += 0.25) {
    g.center_range_m = range;
    const double dtheta = synthetic_angle(g, {0.0, range});
    if (dtheta >= 0.7) continue;
    const double dx = boresight_resolution(g).azimuth_resolution_m;
    const double small_angle = g.wavelength_m() / (2.0 * dtheta);
    const double rel = std::abs(dx / small_angle - 1.0);
    CHECK(rel <= dtheta * dtheta / 12.0 + 1e-3);
    if (dtheta < 0.45) CHECK(rel <= 0.02);
  }
  g.center_range_m = 3.0;
  CHECK(local_azimuth_resolution(g, {0.0, 3.0}) ==
        Approx(g.wavelength_m() / (4.0 * std::sin(0.5 * synthetic_angle(g, {0.0, 3.0})))));
  CHECK(local_azimuth_resolution(g, {0.0, 2.5}) < local_azimuth_resolution(g, {0.0, 3.5}));
}

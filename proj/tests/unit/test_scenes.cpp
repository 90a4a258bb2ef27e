#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include "nfsar/config.hpp"
#include "nfsar/errors.hpp"
#include "nfsar/io.hpp"
#include "nfsar/scenes.hpp"
#include "nfsar/spectral.hpp"

using namespace nfsar;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

ImageGrid desk_grid() { return ImageGrid::centered(64, 64, 0.01, 0.02, 3.0); }

TargetModel fitted(std::size_t id, const ImageGrid& grid) {
  auto m = builtin_models().at(id);
  m.extent_m = max_extent_for_grid(grid);
  return m;
}

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nfsar_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("target generation", "[scenes]") {
  const auto grid = desk_grid();
  REQUIRE(builtin_models().size() == 10);

  SECTION("deterministic") {
    const auto m = fitted(0, grid);
    const auto a = generate_target(m, 30.0, 5, grid);
    const auto b = generate_target(m, 30.0, 5, grid);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].x_m == b[i].x_m);
      CHECK(a[i].y_m == b[i].y_m);
      CHECK(a[i].amplitude == b[i].amplitude);
    }
    const auto c = generate_target(m, 30.0, 6, grid);
    CHECK(c[0].amplitude != a[0].amplitude);
  }

  SECTION("half-turn is a point reflection about the scene centre") {
    const auto centre = grid.point_at(32, 32);
    for (std::size_t id = 0; id < 10; ++id) {
      const auto m = fitted(id, grid);
      const auto a = generate_target(m, 0.0, 11, grid);
      const auto b = generate_target(m, 180.0, 11, grid);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs((b[i].x_m - centre.x_m) + (a[i].x_m - centre.x_m)) <= 1e-12);
        CHECK(std::abs((b[i].y_m - centre.y_m) + (a[i].y_m - centre.y_m)) <= 1e-12);
      }
    }
  }

  SECTION("counts and amplitude tiers") {
    for (std::size_t id = 0; id < 10; ++id) {
      const auto m = fitted(id, grid);
      for (double angle : {0.0, 90.0, 210.0}) {
        const auto s = generate_target(m, angle, 3, grid);
        INFO(m.name << " at " << angle);
        CHECK(s.size() >= 50);
        CHECK(s.size() <= 500);
        CHECK(count_weak(s, m) >= s.size() / 5);
        for (const auto& p : s) {
          const double a = std::abs(p.amplitude);
          const bool weak = a >= m.weak.min && a <= m.weak.max;
          const bool strong = a >= m.strong.min && a <= m.strong.max;
          CHECK((weak || strong));
        }
      }
    }
  }

  SECTION("guard band") {
    auto m = fitted(1, grid);
    for (double angle = 0.0; angle < 360.0; angle += 15.0)
      CHECK_NOTHROW(generate_target(m, angle, 1, grid));
    m.extent_m *= 1.6;
    CHECK_THROWS_AS(generate_target(m, 0.0, 1, grid), OutOfBounds);
    CHECK_THROWS_AS(check_guard({{grid.x_at(3), grid.y_at(30), 1.0}}, grid), OutOfBounds);
    CHECK_NOTHROW(check_guard({{grid.x_at(8), grid.y_at(55), 1.0}}, grid));
  }
}

TEST_CASE("clean rasterisation", "[scenes]") {
  const auto grid = desk_grid();

  SECTION("unit scatterer at a pixel centre") {
    const auto img = rasterize_clean({{grid.x_at(20), grid.y_at(40), 1.0}}, grid);
    std::size_t nonzero = 0;
    for (const auto& v : img.vector()) nonzero += v != cplx{};
    CHECK(nonzero == 1);
    CHECK(img(20, 40) == cplx{1.0, 0.0});
  }

  SECTION("collisions sum coherently and deposition conserves the total") {
    const ScattererSet s{{grid.x_at(20) + 0.002, grid.y_at(40), {0.5, 0.5}},
                         {grid.x_at(20) - 0.003, grid.y_at(40) + 0.004, {0.25, -1.0}},
                         {grid.x_at(30), grid.y_at(10), {0.0, 0.3}}};
    const auto img = rasterize_clean(s, grid);
    CHECK(img(20, 40) == cplx{0.75, -0.5});
    cplx total{}, expected{};
    for (const auto& v : img.vector()) total += v;
    for (const auto& p : s) expected += p.amplitude;
    CHECK(total == expected);
  }

  SECTION("default scenes are sparse") {
    for (std::size_t id = 0; id < 10; ++id) {
      const auto img = rasterize_clean(generate_target(fitted(id, grid), 45.0, 2, grid), grid);
      std::size_t nonzero = 0;
      for (const auto& v : img.vector()) nonzero += v != cplx{};
      CHECK(static_cast<double>(nonzero) / img.size() < 0.15);
    }
  }

  SECTION("snapping moves scatterers to pixel centres") {
    const auto s = snap_to_pixels({{grid.x_at(12) + 0.004, grid.y_at(7) - 0.009, 1.0}}, grid);
    CHECK(s[0].x_m == grid.x_at(12));
    CHECK(s[0].y_m == grid.y_at(7));
  }
}

TEST_CASE("dataset protocol", "[scenes]") {
  SECTION("desk default: 72 pairs split 60 / 12") {
    DatasetConfig c;
    const auto plan = dataset_plan(c);
    CHECK(plan.size() == 72);
    std::set<std::pair<std::size_t, double>> unique(plan.begin(), plan.end());
    CHECK(unique.size() == 72);
    const auto entries = generate_dataset(c);
    REQUIRE(entries.size() == 72);
    std::size_t train = 0;
    for (const auto& e : entries) train += e.split == Split::train;
    CHECK(train == 60);
    // Reproducible from clean image and stored seed.
    const auto bank = build_bank(c.geometry, c.grid, c.block_size);
    for (std::size_t i : {0u, 41u, 71u}) {
      const auto& e = entries[i];
      CHECK(add_noise(forward(e.clean, bank), {c.image_snr_db, e.noise_seed}).vector() ==
            e.degraded.vector());
    }
  }

  SECTION("paper protocol: 120 pairs split 100 / 20") {
    const auto c = DatasetConfig::paper_scale();
    CHECK(c.grid.nx == 256);
    const auto plan = dataset_plan(c);
    CHECK(plan.size() == 120);
    std::set<std::pair<std::size_t, double>> train(plan.begin(), plan.begin() + 100);
    std::set<std::pair<std::size_t, double>> test(plan.begin() + 100, plan.end());
    CHECK(train.size() == 100);
    CHECK(test.size() == 20);
    for (const auto& p : test) CHECK(train.count(p) == 0);
  }

  SECTION("echo path matches the operator path in scale") {
    DatasetConfig c;
    c.total_pairs = 2;
    c.train_pairs = 1;
    c.image_snr_db.reset();
    auto e = c;
    e.path = GenerationPath::echo_backprojection;
    const auto op = generate_dataset(c);
    const auto bp = generate_dataset(e);
    CHECK(op[0].clean.vector() == bp[0].clean.vector());
    const double ratio = std::sqrt(bp[0].degraded.norm_squared() / op[0].degraded.norm_squared());
    CHECK(ratio > 0.5);
    CHECK(ratio < 2.0);
    const double corr = std::abs(inner(op[0].degraded, bp[0].degraded)) /
                        std::sqrt(op[0].degraded.norm_squared() * bp[0].degraded.norm_squared());
    CHECK(corr > 0.8);
  }

  SECTION("written dataset round-trips and rebuilds byte-identically") {
    DatasetConfig c;
    c.total_pairs = 6;
    c.train_pairs = 4;
    const auto dir_a = scratch_dir("ds_a");
    const auto dir_b = scratch_dir("ds_b");
    const auto m = build_dataset(c, dir_a);
    build_dataset(c, dir_b);
    CHECK(io::read_file(dir_a / "manifest.json") == io::read_file(dir_b / "manifest.json"));
    for (const auto& e : m.entries) {
      CHECK(io::read_file(dir_a / e.clean_path) == io::read_file(dir_b / e.clean_path));
      CHECK(io::read_file(dir_a / e.degraded_path) == io::read_file(dir_b / e.degraded_path));
    }
    const auto loaded = read_manifest(dir_a / "manifest.json");
    CHECK(loaded.entries.size() == 6);
    CHECK(loaded.count(Split::train) == 4);
    CHECK(loaded.count(Split::test) == 2);
    CHECK(loaded.config.grid == c.grid);
    CHECK(loaded.config.image_snr_db == c.image_snr_db);
    CHECK(load_split(loaded, Split::test).size() == 2);
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
  }

  SECTION("invalid configurations") {
    DatasetConfig c;
    c.total_pairs = 121;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.train_pairs = 80;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.block_size = 24;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
}

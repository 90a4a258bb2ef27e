#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "nfsar/degradation.hpp"
#include "nfsar/errors.hpp"
#include "nfsar/spectral.hpp"

using namespace nfsar;
using Catch::Approx;

namespace {

ComplexImage random_image(const ImageGrid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexImage img(grid);
  for (auto& v : img.vector()) {
    const double re = n(rng);
    v = {re, n(rng)};
  }
  return img;
}

double rel_diff(const ComplexImage& a, const ComplexImage& b) {
  return std::sqrt((a - b).norm_squared() / std::max(b.norm_squared(), 1e-300));
}

ImageGrid grid_of(std::size_t n) {
  // 0.01 m azimuth pixels keep every block of the scene Nyquist-sampled.
  return ImageGrid::centered(n, n, 0.01, 0.02, 3.0);
}

}  // namespace

TEST_CASE("adjoint identity", "[operator]") {
  SceneGeometry g;
  const std::size_t n = GENERATE(32, 64);
  const std::size_t block = GENERATE(8, 16, 0);
  const auto grid = grid_of(n);
  const auto bank = build_bank(g, grid, block == 0 ? n : block);
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto x = random_image(grid, 2 * t + 1);
    const auto y = random_image(grid, 2 * t + 2);
    const cplx lhs = inner(forward(x, bank), y);
    const cplx rhs = inner(x, adjoint(y, bank));
    INFO("n=" << n << " block=" << block << " trial " << t);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
  }
}

TEST_CASE("forward operator", "[operator]") {
  SceneGeometry g;
  const auto grid = grid_of(64);
  const auto bank = build_bank(g, grid, 8);

  SECTION("zero in, zero out") {
    CHECK(forward(ComplexImage(grid), bank).norm_squared() == 0.0);
    CHECK(adjoint(ComplexImage(grid), bank).norm_squared() == 0.0);
  }

  SECTION("linearity") {
    const auto x1 = random_image(grid, 11);
    const auto x2 = random_image(grid, 12);
    const cplx a{0.7, -1.3}, b{-2.1, 0.4};
    const auto lhs = forward(a * x1 + b * x2, bank);
    const auto rhs = a * forward(x1, bank) + b * forward(x2, bank);
    CHECK(rel_diff(lhs, rhs) <= 1e-10);
  }

  SECTION("impulse at a block centre reproduces the shifted block PSF") {
    for (std::size_t b : {0u, 9u, 27u, 36u, 63u}) {
      const auto [cx, cy] = bank.center_pixel(b);
      ComplexImage x(grid);
      x(cx, cy) = 1.0;
      const auto y = forward(x, bank);
      const auto& blk = bank.block(b);
      auto psf = psf_image(blk.dense_mask(grid.size()), grid);
      psf *= blk.gain;
      const auto expected =
          circshift(psf, static_cast<std::ptrdiff_t>(cx) - 32, static_cast<std::ptrdiff_t>(cy) - 32);
      INFO("block " << b);
      CHECK(rel_diff(y, expected) <= 1e-10);
      CHECK(std::abs(y(cx, cy)) == Approx(blk.gain));
    }
  }

  SECTION("block locality") {
    // Changing another block's mask leaves the response to block 18 unchanged.
    ComplexImage x(grid);
    for (std::size_t iy = 16; iy < 24; ++iy)
      for (std::size_t ix = 16; ix < 24; ++ix) x(ix, iy) = cplx(ix * 0.1, iy * -0.05);
    REQUIRE(bank.block_of(16, 16) == 18);
    auto blocks = bank.blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b)
      if (b != 18) blocks[b].set_mask(blocks[b ^ 1].dense_mask(grid.size()));
    const BlockMaskBank altered(g, grid, 8, 8, blocks);
    CHECK(forward(x, altered).vector() == forward(x, bank).vector());
  }

  SECTION("deterministic") {
    const auto x = random_image(grid, 3);
    CHECK(forward(x, bank).vector() == forward(x, bank).vector());
    CHECK(adjoint(x, bank).vector() == adjoint(x, bank).vector());
  }

  SECTION("grid mismatch") {
    const auto other = ImageGrid::centered(32, 32, 0.01, 0.02, 3.0);
    CHECK_THROWS_AS(forward(ComplexImage(other), bank), GridMismatch);
    CHECK_THROWS_AS(adjoint(ComplexImage(other), bank), GridMismatch);
  }
}

TEST_CASE("single full-image block", "[operator]") {
  SceneGeometry g;
  const auto grid = grid_of(32);

  SECTION("all-ones mask is the identity") {
    const auto bank = bank_from_mask(g, grid, SpectralMask(grid.size(), 1.0));
    const auto x = random_image(grid, 5);
    CHECK(rel_diff(forward(x, bank), x) <= 1e-12);
    CHECK(rel_diff(adjoint(x, bank), x) <= 1e-12);
    CHECK(power_iteration_norm(bank) == Approx(1.0).margin(1e-6));
  }

  SECTION("binary mask is a projection") {
    const auto bank = build_single_block_bank(g, grid, {0.0, 3.0});
    const auto x = random_image(grid, 6);
    const auto once = forward(x, bank);
    CHECK(rel_diff(forward(once, bank), once) <= 1e-12);
    const double est = power_iteration_norm(bank);
    CHECK(est <= 1.0 + 1e-6);
    CHECK(est == Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("power iteration on a multi-block bank", "[operator]") {
  SceneGeometry g;
  const auto bank = build_bank(g, grid_of(64), 8);
  const double e50 = power_iteration_norm(bank, 50, 0);
  const double e100 = power_iteration_norm(bank, 100, 0);
  const double e800 = power_iteration_norm(bank, 800, 0);
  const double e1600 = power_iteration_norm(bank, 1600, 0);
  // Sum of per-block projections: bounded by the block count, not by 1.
  CHECK(e100 > 1.0);
  CHECK(e1600 <= static_cast<double>(bank.block_count()));
  // Rayleigh quotients increase toward the top eigenvalue.
  CHECK(e50 <= e100 + 1e-12);
  CHECK(e100 <= e800 + 1e-12);
  // The top of the spectrum is clustered, so 50 -> 100 still moves by ~0.4%.
  CHECK(std::abs(e100 - e50) <= 1e-2 * e100);
  CHECK(std::abs(e1600 - e800) <= 1e-4 * e1600);
  CHECK(power_iteration_norm(bank, 50, 0) == e50);
  CHECK_THROWS_AS(power_iteration_norm(bank, 5), InvalidArgument);
}

TEST_CASE("additive noise", "[operator]") {
  const auto grid = ImageGrid::centered(128, 128, 0.01, 0.02, 3.0);
  const auto y = random_image(grid, 21);

  SECTION("noiseless sentinels") {
    CHECK(add_noise(y, {}).vector() == y.vector());
    CHECK(add_noise(y, {std::numeric_limits<double>::infinity(), 4}).vector() == y.vector());
    CHECK_THROWS_AS(add_noise(y, {std::numeric_limits<double>::quiet_NaN(), 4}),
                    InvalidArgument);
  }

  SECTION("seeded noise is reproducible") {
    const auto a = add_noise(y, {20.0, 99});
    const auto b = add_noise(y, {20.0, 99});
    const auto c = add_noise(y, {20.0, 100});
    CHECK(a.vector() == b.vector());
    CHECK(a.vector() != c.vector());
  }

  SECTION("empirical SNR") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto noisy = add_noise(y, {20.0, seed});
      const double snr = 10.0 * std::log10(y.norm_squared() / (noisy - y).norm_squared());
      CHECK(std::abs(snr - 20.0) <= 0.5);
    }
  }

  SECTION("zero signal") {
    CHECK_THROWS_AS(add_noise(ComplexImage(grid), {20.0, 1}), ZeroSignal);
    CHECK(add_noise(ComplexImage(grid), {}).norm_squared() == 0.0);
  }
}

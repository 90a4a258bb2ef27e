#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nfsar/errors.hpp"
#include "nfsar/metrics.hpp"

using namespace nfsar;
using Catch::Approx;

namespace {

ImageGrid grid32() { return ImageGrid::centered(32, 32, 0.01, 0.02, 3.0); }

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

// Brute-force 2-D windowed SSIM used as an oracle.
double ssim_direct(const ComplexImage& a, const ComplexImage& b, std::size_t w, double sigma) {
  const double peak = a.max_abs();
  const std::size_t nx = a.nx(), ny = a.ny();
  std::vector<double> win(w * w);
  double wsum = 0.0;
  const double mid = 0.5 * (w - 1.0);
  for (std::size_t j = 0; j < w; ++j)
    for (std::size_t i = 0; i < w; ++i) {
      const double d2 = (i - mid) * (i - mid) + (j - mid) * (j - mid);
      win[j * w + i] = std::exp(-d2 / (2 * sigma * sigma));
      wsum += win[j * w + i];
    }
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t y0 = 0; y0 + w <= ny; ++y0)
    for (std::size_t x0 = 0; x0 + w <= nx; ++x0) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (std::size_t j = 0; j < w; ++j)
        for (std::size_t i = 0; i < w; ++i) {
          const double k = win[j * w + i] / wsum;
          const double va = std::abs(a(x0 + i, y0 + j)) / peak;
          const double vb = std::abs(b(x0 + i, y0 + j)) / peak;
          ma += k * va;
          mb += k * vb;
          saa += k * va * va;
          sbb += k * vb * vb;
          sab += k * va * vb;
        }
      const double c1 = 1e-4, c2 = 9e-4;
      total += (2 * ma * mb + c1) * (2 * (sab - ma * mb) + c2) /
               ((ma * ma + mb * mb + c1) * (saa - ma * ma + sbb - mb * mb + c2));
      ++count;
    }
  return total / count;
}

}  // namespace

TEST_CASE("mse", "[metrics]") {
  const auto grid = grid32();
  const auto a = random_image(grid, 1);
  const auto b = random_image(grid, 2);

  CHECK(metrics::mse(a, a) == 0.0);

  SECTION("against zero is the mean normalised power") {
    double expected = 0.0;
    const double peak = a.max_abs();
    for (const auto& v : a.vector()) expected += std::norm(v) / (peak * peak);
    expected /= static_cast<double>(a.size());
    CHECK(metrics::mse(a, ComplexImage(grid)) == Approx(expected).epsilon(1e-12));
  }

  SECTION("normaliser comes from the first argument") {
    auto half = a;
    half *= 0.5;
    CHECK(metrics::mse(a, half) == Approx(0.25 * metrics::mse(half, a)).epsilon(1e-12));
    CHECK(metrics::mse(a, half) != Approx(metrics::mse(half, a)));
  }

  SECTION("invariant to joint positive scaling") {
    auto a3 = a, b3 = b;
    a3 *= 3.7;
    b3 *= 3.7;
    CHECK(metrics::mse(a3, b3) == Approx(metrics::mse(a, b)).epsilon(1e-12));
  }

  SECTION("magnitude versus complex") {
    auto rotated = a;
    rotated *= std::polar(1.0, 0.9);
    CHECK(metrics::mse(a, rotated) == Approx(0.0).margin(1e-24));
    CHECK(metrics::mse(a, rotated, true) > 0.1);
  }

  SECTION("errors") {
    CHECK_THROWS_AS(metrics::mse(a, ComplexImage(ImageGrid::centered(16, 16, 0.01, 0.02, 3.0))),
                    GridMismatch);
    CHECK_THROWS_AS(metrics::mse(ComplexImage(grid), a), ZeroSignal);
  }
}

TEST_CASE("ssim", "[metrics]") {
  const auto grid = grid32();
  const auto a = random_image(grid, 3);
  const auto b = random_image(grid, 4);

  CHECK(metrics::ssim(a, a) == 1.0);
  CHECK(metrics::ssim(b, b) == 1.0);

  SECTION("matches a direct windowed evaluation") {
    CHECK(metrics::ssim(a, b) == Approx(ssim_direct(a, b, 11, 1.5)).epsilon(1e-10));
    auto blurred = a;
    for (std::size_t i = 0; i < a.size(); ++i) blurred[i] = 0.8 * a[i] + 0.2 * b[i];
    const double s = metrics::ssim(a, blurred);
    CHECK(s == Approx(ssim_direct(a, blurred, 11, 1.5)).epsilon(1e-10));
    CHECK(s > metrics::ssim(a, b));
    CHECK(s < 1.0);
  }

  SECTION("inverted checkerboard scores below zero") {
    ComplexImage board(grid), inverted(grid);
    for (std::size_t iy = 0; iy < 32; ++iy)
      for (std::size_t ix = 0; ix < 32; ++ix) {
        const bool on = ((ix / 4) + (iy / 4)) % 2 == 0;
        board(ix, iy) = on ? 1.0 : 0.0;
        inverted(ix, iy) = on ? 0.0 : 1.0;
      }
    const double s = metrics::ssim(board, inverted);
    CHECK(s < 0.0);
    CHECK(s >= -1.0);
  }

  SECTION("bounded") {
    for (std::uint64_t seed = 10; seed < 15; ++seed) {
      const double s = metrics::ssim(a, random_image(grid, seed));
      CHECK(s >= -1.0);
      CHECK(s <= 1.0);
    }
  }

  SECTION("errors") {
    const auto tiny = ImageGrid{8, 8, 0.01, 0.01, 0.0, 1.0};
    CHECK_THROWS_AS(metrics::ssim(ComplexImage(tiny, std::vector<cplx>(64, 1.0)),
                                  ComplexImage(tiny, std::vector<cplx>(64, 1.0))),
                    TooSmall);
    CHECK_THROWS_AS(metrics::ssim(a, ComplexImage(ImageGrid::centered(16, 16, 0.01, 0.02, 3.0))),
                    GridMismatch);
  }
}

TEST_CASE("mainlobe width", "[metrics]") {
  const auto grid = ImageGrid::centered(64, 64, 0.01, 0.02, 3.0);

  SECTION("discrete impulse") {
    ComplexImage img(grid);
    img(20, 30) = {0.0, 2.0};
    const auto w = metrics::mainlobe_width(img, 20, 30);
    CHECK(w.width_x_m <= grid.dx_m);
    CHECK(w.width_y_m <= grid.dy_m);
  }

  SECTION("Gaussian intensity blob") {
    // |img|^2 is Gaussian with standard deviation sigma, so the -3 dB width
    // is its full width at half maximum, 2 sigma sqrt(2 ln 2).
    const double sx = 0.04, sy = 0.09;
    ComplexImage img(grid);
    for (std::size_t iy = 0; iy < 64; ++iy)
      for (std::size_t ix = 0; ix < 64; ++ix) {
        const double x = grid.x_at(ix) - grid.x_at(32), y = grid.y_at(iy) - grid.y_at(32);
        const double intensity = std::exp(-x * x / (2 * sx * sx) - y * y / (2 * sy * sy));
        img(ix, iy) = std::polar(std::sqrt(intensity), 0.3 * ix);
      }
    const auto w = metrics::mainlobe_width(img, 32, 32);
    const double k = 2.0 * std::sqrt(2.0 * std::log(2.0));
    CHECK(w.width_x_m == Approx(k * sx).epsilon(0.02));
    CHECK(w.width_y_m == Approx(k * sy).epsilon(0.02));
  }

  SECTION("errors") {
    ComplexImage flat(grid, std::vector<cplx>(grid.size(), 1.0));
    CHECK_THROWS_AS(metrics::mainlobe_width(flat, 10, 10), NoCrossing);
    ComplexImage ramp(grid);
    for (std::size_t iy = 0; iy < 64; ++iy)
      for (std::size_t ix = 0; ix < 64; ++ix) ramp(ix, iy) = 1.0 + ix;
    CHECK_THROWS_AS(metrics::mainlobe_width(ramp, 10, 10), InvalidArgument);
  }
}

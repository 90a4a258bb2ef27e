#include "nfsar/metrics.hpp"

#include <cmath>
#include <vector>

#include "nfsar/errors.hpp"

namespace nfsar::metrics {

namespace {

double truth_peak(const ComplexImage& truth) {
  const double peak = truth.max_abs();
  if (!(peak > 0.0)) throw ZeroSignal("ground truth image is identically zero");
  return peak;
}

// Separable 'valid' filtering with a normalised 1-D kernel.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t nx, std::size_t ny,
                                 const std::vector<double>& kernel) {
  const std::size_t w = kernel.size();
  const std::size_t ox = nx - w + 1, oy = ny - w + 1;
  std::vector<double> rows(ny * ox);
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < ox; ++ix) {
      double s = 0.0;
      for (std::size_t k = 0; k < w; ++k) s += kernel[k] * img[iy * nx + ix + k];
      rows[iy * ox + ix] = s;
    }
  std::vector<double> out(oy * ox);
  for (std::size_t iy = 0; iy < oy; ++iy)
    for (std::size_t ix = 0; ix < ox; ++ix) {
      double s = 0.0;
      for (std::size_t k = 0; k < w; ++k) s += kernel[k] * rows[(iy + k) * ox + ix];
      out[iy * ox + ix] = s;
    }
  return out;
}

// Position along one axis where |v| first drops below `level`, walking
// away from `start` in direction `step`; linear interpolation between samples.
double crossing(const std::vector<double>& v, std::size_t start, int step, double level) {
  auto i = static_cast<std::ptrdiff_t>(start);
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  while (true) {
    const auto next = i + step;
    if (next < 0 || next >= n) throw NoCrossing("magnitude never falls 3 dB below the peak");
    if (v[static_cast<std::size_t>(next)] < level) {
      const double a = v[static_cast<std::size_t>(i)];
      const double b = v[static_cast<std::size_t>(next)];
      const double t = (a - level) / (a - b);
      return static_cast<double>(i) + step * t;
    }
    i = next;
  }
}

}  // namespace

double mse(const ComplexImage& truth, const ComplexImage& estimate, bool complex_values) {
  require_same_grid(truth.grid(), estimate.grid(), "mse");
  const double scale = 1.0 / truth_peak(truth);
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (complex_values) {
      s += std::norm((truth[i] - estimate[i]) * scale);
    } else {
      const double d = (std::abs(truth[i]) - std::abs(estimate[i])) * scale;
      s += d * d;
    }
  }
  return s / static_cast<double>(truth.size());
}

double ssim(const ComplexImage& truth, const ComplexImage& estimate, const SsimOptions& opts) {
  require_same_grid(truth.grid(), estimate.grid(), "ssim");
  const std::size_t nx = truth.nx(), ny = truth.ny();
  if (opts.window == 0 || nx < opts.window || ny < opts.window)
    throw TooSmall("image is smaller than the SSIM window");

  const double scale = 1.0 / truth_peak(truth);
  std::vector<double> a(nx * ny), b(nx * ny), aa(nx * ny), bb(nx * ny), ab(nx * ny);
  for (std::size_t i = 0; i < nx * ny; ++i) {
    a[i] = std::abs(truth[i]) * scale;
    b[i] = std::abs(estimate[i]) * scale;
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }

  std::vector<double> kernel(opts.window);
  const double mid = 0.5 * static_cast<double>(opts.window - 1);
  double ksum = 0.0;
  for (std::size_t k = 0; k < opts.window; ++k) {
    const double d = static_cast<double>(k) - mid;
    kernel[k] = std::exp(-d * d / (2.0 * opts.sigma * opts.sigma));
    ksum += kernel[k];
  }
  for (auto& k : kernel) k /= ksum;

  const auto mu_a = filter_valid(a, nx, ny, kernel);
  const auto mu_b = filter_valid(b, nx, ny, kernel);
  const auto e_aa = filter_valid(aa, nx, ny, kernel);
  const auto e_bb = filter_valid(bb, nx, ny, kernel);
  const auto e_ab = filter_valid(ab, nx, ny, kernel);

  // Dynamic range is 1 after normalising by the truth peak.
  const double c1 = opts.k1 * opts.k1;
  const double c2 = opts.k2 * opts.k2;
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
    const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
    const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
    total += num / den;
  }
  return total / static_cast<double>(mu_a.size());
}

MainlobeWidth mainlobe_width(const ComplexImage& img, std::size_t peak_ix, std::size_t peak_iy) {
  const std::size_t nx = img.nx(), ny = img.ny();
  if (peak_ix >= nx || peak_iy >= ny) throw InvalidArgument("peak pixel outside the image");
  const double peak = std::abs(img(peak_ix, peak_iy));
  if (!(peak > 0.0)) throw InvalidArgument("peak pixel has zero magnitude");
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const auto x = static_cast<std::ptrdiff_t>(peak_ix) + dx;
      const auto y = static_cast<std::ptrdiff_t>(peak_iy) + dy;
      if (x < 0 || y < 0 || x >= static_cast<std::ptrdiff_t>(nx) ||
          y >= static_cast<std::ptrdiff_t>(ny))
        continue;
      if (std::abs(img(static_cast<std::size_t>(x), static_cast<std::size_t>(y))) > peak)
        throw InvalidArgument("peak pixel is not a local maximum");
    }

  const double level = peak / std::sqrt(2.0);
  std::vector<double> row(nx), col(ny);
  for (std::size_t ix = 0; ix < nx; ++ix) row[ix] = std::abs(img(ix, peak_iy));
  for (std::size_t iy = 0; iy < ny; ++iy) col[iy] = std::abs(img(peak_ix, iy));

  const double wx = crossing(row, peak_ix, +1, level) - crossing(row, peak_ix, -1, level);
  const double wy = crossing(col, peak_iy, +1, level) - crossing(col, peak_iy, -1, level);
  return {wx * img.grid().dx_m, wy * img.grid().dy_m};
}

}  // namespace nfsar::metrics

#pragma once

#include <cstddef>

#include "nfsar/image.hpp"

namespace nfsar::metrics {

/// Mean squared error of magnitude images, both divided by the peak
/// magnitude of `truth`. Argument order matters: truth first. With
/// `complex_values` the error is taken on complex samples instead.
double mse(const ComplexImage& truth, const ComplexImage& estimate, bool complex_values = false);

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean local SSIM over Gaussian-windowed magnitude images ('valid' window
/// positions only). Dynamic range is the peak magnitude of `truth`.
double ssim(const ComplexImage& truth, const ComplexImage& estimate, const SsimOptions& opts = {});

struct MainlobeWidth {
  double width_x_m = 0.0;
  double width_y_m = 0.0;
};

/// -3 dB full widths of |img| along the row and column through the peak
/// pixel, with linear interpolation between samples. Throws NoCrossing.
MainlobeWidth mainlobe_width(const ComplexImage& img, std::size_t peak_ix, std::size_t peak_iy);

}  // namespace nfsar::metrics

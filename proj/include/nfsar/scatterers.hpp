#pragma once

#include <vector>

#include "nfsar/image.hpp"

namespace nfsar {

/// Ideal point scatterer a * delta(x - x0, y - y0).
struct Scatterer {
  double x_m = 0.0;
  double y_m = 0.0;
  cplx amplitude{1.0, 0.0};
};

using ScattererSet = std::vector<Scatterer>;

}  // namespace nfsar

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "nfsar/unrolled.hpp"

namespace nfsar::testing {

struct GradCheck {
  double worst_relative = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Central differences for every parameter. Relative error is
/// |a - n| / max(|a|, |n|, floor).
inline GradCheck gradient_check(std::span<const unrolled::Sample> batch,
                                const unrolled::NetworkParams& params, const BlockMaskBank& bank,
                                double h = 1e-5, double floor = 1e-8) {
  const auto analytic = unrolled::loss_and_gradients(batch, params, bank).grad.flatten();
  auto flat = params.flatten();
  auto probe = params;
  GradCheck out;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double keep = flat[i];
    flat[i] = keep + h;
    probe.assign(flat);
    const double up = unrolled::loss(batch, probe, bank);
    flat[i] = keep - h;
    probe.assign(flat);
    const double down = unrolled::loss(batch, probe, bank);
    flat[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double rel = std::abs(numeric - analytic[i]) /
                       std::max({std::abs(numeric), std::abs(analytic[i]), floor});
    if (rel > out.worst_relative) {
      out.worst_relative = rel;
      out.worst_index = i;
    }
    ++out.checked;
  }
  return out;
}

}  // namespace nfsar::testing

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nfsar/config.hpp"
#include "nfsar/solvers.hpp"
#include "nfsar/unrolled.hpp"

namespace nfsar::eval {

/// Divides every pixel by the gain of its block, so a unit scatterer in a
/// degraded image has unit peak.
ComplexImage calibrate_gain(const ComplexImage& img, const BlockMaskBank& bank);

/// Restores one image. `network` is required for Method::network.
ComplexImage restore(solvers::Method m, const ComplexImage& y, const BlockMaskBank& bank,
                     const SolverConfig& cfg, const unrolled::NetworkParams* network = nullptr);

struct MethodScore {
  solvers::Method method{};
  double mse = 0.0;
  double ssim = 0.0;
  std::vector<double> mse_per_image;
  std::vector<double> ssim_per_image;
  double seconds = 0.0;
};

struct Report {
  std::size_t images = 0;
  std::vector<MethodScore> scores;
  json settings;

  const MethodScore& at(solvers::Method m) const;
  json to_json() const;
  /// Methods as columns, MSE and SSIM as rows.
  std::string table() const;
};

Report evaluate(std::span<const ImagePair> pairs, const BlockMaskBank& bank, const SolverConfig& cfg,
                std::span<const solvers::Method> methods,
                const unrolled::NetworkParams* network = nullptr);

struct BetaSweep {
  double best = 0.0;
  std::vector<std::pair<double, double>> mse_by_beta;
};

/// Picks the beta with the lowest mean MSE for an L1 method on `pairs`.
BetaSweep tune_beta(std::span<const ImagePair> pairs, const BlockMaskBank& bank, SolverConfig cfg,
                    solvers::Method m, std::span<const double> candidates);

}  // namespace nfsar::eval

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nfsar/config.hpp"
#include "nfsar/degradation.hpp"
#include "nfsar/image.hpp"
#include "nfsar/spectral.hpp"

namespace nfsar::solvers {

/// 0.5 ||Y - f(X)||^2 + beta * sum |X|
double l1_objective(const ComplexImage& y, const ComplexImage& x, const BlockMaskBank& bank,
                    double beta);

/// max(|w| - t, 0) * w / |w|, per pixel.
ComplexImage soft_threshold(const ComplexImage& w, double t);

struct ProxGradResult {
  ComplexImage x;
  /// Objective at X0 followed by one value per accepted iteration.
  std::vector<double> objective;
  std::size_t iterations = 0;
  bool converged = false;
  double final_mu = 0.0;  ///< step in use when the loop ended
  double last_change = 0.0;
};

/// L1-regularised deconvolution by proximal gradient (ISTA) with optional
/// backtracking. `x0` defaults to zero.
ProxGradResult prox_grad_l1(const ComplexImage& y, const BlockMaskBank& bank,
                            const SolverConfig& cfg,
                            const std::optional<ComplexImage>& x0 = std::nullopt);

/// One-block bank holding the mask of the block that contains the image centre.
BlockMaskBank global_bank(const BlockMaskBank& bank);

/// prox_grad_l1 under a spatially invariant PSF with the given mask.
ProxGradResult global_deconv_l1(const ComplexImage& y, const SceneGeometry& geom,
                                const SpectralMask& center_mask, const SolverConfig& cfg);

struct CleanComponent {
  std::size_t ix = 0;
  std::size_t iy = 0;
  cplx amplitude;
};

struct CleanResult {
  std::vector<CleanComponent> model;
  ComplexImage residual;
  ComplexImage restored;  ///< model deposited as raw impulses
  std::size_t iterations = 0;
};

/// Greedy CLEAN with the bank's block PSFs.
CleanResult clean(const ComplexImage& y, const BlockMaskBank& bank, const SolverConfig& cfg);

/// Separable spatially variant apodization, x pass then y pass.
ComplexImage sva(const ComplexImage& y, const SolverConfig& cfg);
/// One pass along x (`along_x`) or y.
ComplexImage sva_pass(const ComplexImage& y, double weight_max, bool along_x);

enum class Method { sparsity, deconv, clean, sva, network };

std::string to_string(Method m);
/// Throws ConfigError for unknown names.
Method parse_method(const std::string& name);
const std::vector<Method>& all_methods();

/// Restores `y` with a classical method (everything except `network`).
ComplexImage restore_classical(Method m, const ComplexImage& y, const BlockMaskBank& bank,
                               const SolverConfig& cfg);

}  // namespace nfsar::solvers

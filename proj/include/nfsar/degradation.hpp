#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "nfsar/image.hpp"
#include "nfsar/spectral.hpp"

namespace nfsar {

/// Spatially variant blockwise convolution
///   Y = sum_b IDFT( M_b . DFT( X . 1_b ) ).
/// Linear; blocks are summed in index order so results are bit-reproducible.
ComplexImage forward(const ComplexImage& x, const BlockMaskBank& bank);

/// Exact adjoint of `forward` under <a, b> = sum conj(a) b:
///   A -> sum_b 1_b . IDFT( conj(M_b) . DFT(A) ).
ComplexImage adjoint(const ComplexImage& a, const BlockMaskBank& bank);

/// Additive white circular complex Gaussian noise at a target SNR.
/// An empty snr_db means noiseless.
struct NoiseModel {
  std::optional<double> snr_db;
  std::uint64_t seed = 0;
};

/// Throws ZeroSignal when `y` is identically zero and a finite SNR is
/// requested. snr_db = +inf is accepted as noiseless.
ComplexImage add_noise(const ComplexImage& y, const NoiseModel& model);
void add_noise_inplace(std::span<cplx> y, const NoiseModel& model);

/// Largest eigenvalue of adjoint(forward(.)), by power iteration from a
/// seeded random start. Requires iterations >= 10.
double power_iteration_norm(const BlockMaskBank& bank, std::size_t iterations = 50,
                            std::uint64_t seed = 0);

}  // namespace nfsar

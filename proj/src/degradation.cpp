#include "nfsar/degradation.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "nfsar/errors.hpp"
#include "nfsar/fft.hpp"

namespace nfsar {

namespace {

bool block_is_zero(const ComplexImage& x, const BlockMaskBank& bank, const BlockMaskBank::Block& b) {
  for (std::size_t iy = b.y0; iy < b.y0 + bank.block_ny(); ++iy)
    for (std::size_t ix = b.x0; ix < b.x0 + bank.block_nx(); ++ix)
      if (x(ix, iy) != cplx{}) return false;
  return true;
}

}  // namespace

ComplexImage forward(const ComplexImage& x, const BlockMaskBank& bank) {
  require_same_grid(x.grid(), bank.grid(), "forward");
  const auto& grid = x.grid();
  ComplexImage accum(grid);
  ComplexImage scratch(grid);
  for (const auto& blk : bank.blocks()) {
    // Zero blocks contribute exactly zero, so skipping them keeps the sum
    // bit-identical while saving transforms on sparse scenes.
    if (block_is_zero(x, bank, blk)) continue;
    std::fill(scratch.vector().begin(), scratch.vector().end(), cplx{});
    for (std::size_t iy = blk.y0; iy < blk.y0 + bank.block_ny(); ++iy)
      for (std::size_t ix = blk.x0; ix < blk.x0 + bank.block_nx(); ++ix)
        scratch(ix, iy) = x(ix, iy);
    fft::forward(scratch);
    for (std::size_t j = 0; j < blk.support.size(); ++j)
      accum[blk.support[j]] += blk.weights[j] * scratch[blk.support[j]];
  }
  fft::inverse(accum);
  return accum;
}

ComplexImage adjoint(const ComplexImage& a, const BlockMaskBank& bank) {
  require_same_grid(a.grid(), bank.grid(), "adjoint");
  const auto& grid = a.grid();
  ComplexImage spectrum = a;
  fft::forward(spectrum);
  ComplexImage out(grid);
  ComplexImage scratch(grid);
  for (const auto& blk : bank.blocks()) {
    // Masks are real, so conj(M_b) == M_b.
    std::fill(scratch.vector().begin(), scratch.vector().end(), cplx{});
    for (std::size_t j = 0; j < blk.support.size(); ++j)
      scratch[blk.support[j]] = blk.weights[j] * spectrum[blk.support[j]];
    fft::inverse(scratch);
    for (std::size_t iy = blk.y0; iy < blk.y0 + bank.block_ny(); ++iy)
      for (std::size_t ix = blk.x0; ix < blk.x0 + bank.block_nx(); ++ix)
        out(ix, iy) = scratch(ix, iy);
  }
  return out;
}

void add_noise_inplace(std::span<cplx> y, const NoiseModel& model) {
  if (!model.snr_db || *model.snr_db == std::numeric_limits<double>::infinity()) return;
  if (!std::isfinite(*model.snr_db)) throw InvalidArgument("snr_db must be finite or +inf");
  double energy = 0.0;
  for (const auto& v : y) energy += std::norm(v);
  if (energy == 0.0) throw ZeroSignal("cannot scale noise to a zero signal");
  const double per_sample =
      energy / (static_cast<double>(y.size()) * std::pow(10.0, *model.snr_db / 10.0));
  std::mt19937_64 rng(model.seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * per_sample));
  for (auto& v : y) {
    const double re = normal(rng);
    const double im = normal(rng);
    v += cplx{re, im};
  }
}

ComplexImage add_noise(const ComplexImage& y, const NoiseModel& model) {
  ComplexImage out = y;
  add_noise_inplace(out.samples(), model);
  return out;
}

double power_iteration_norm(const BlockMaskBank& bank, std::size_t iterations,
                            std::uint64_t seed) {
  if (iterations < 10) throw InvalidArgument("power iteration needs at least 10 iterations");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexImage x(bank.grid());
  for (auto& v : x.vector()) {
    const double re = normal(rng);
    const double im = normal(rng);
    v = {re, im};
  }
  x *= 1.0 / std::sqrt(x.norm_squared());
  double estimate = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    ComplexImage y = adjoint(forward(x, bank), bank);
    estimate = inner(x, y).real();
    const double n = std::sqrt(y.norm_squared());
    if (n == 0.0) return 0.0;
    y *= 1.0 / n;
    x = std::move(y);
  }
  return estimate;
}

}  // namespace nfsar

#include "nfsar/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nfsar/errors.hpp"
#include "nfsar/fft.hpp"

namespace nfsar {

namespace {

std::vector<double> dft_wavenumbers(std::size_t n, double d) {
  std::vector<double> k(n);
  const double dk = 2.0 * kPi / (static_cast<double>(n) * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto signed_i = i <= n / 2 ? static_cast<double>(i)
                                     : static_cast<double>(i) - static_cast<double>(n);
    k[i] = signed_i * dk;
  }
  return k;
}

double raised_cosine(double depth, double width) {
  if (depth <= 0.0) return 0.0;
  if (width <= 0.0 || depth >= width) return 1.0;
  return 0.5 * (1.0 - std::cos(kPi * depth / width));
}

}  // namespace

KGrid KGrid::from(const ImageGrid& grid) {
  grid.validate();
  return {dft_wavenumbers(grid.nx, grid.dx_m), dft_wavenumbers(grid.ny, grid.dy_m)};
}

double KGrid::kx_extent() const { return *std::max_element(kx.begin(), kx.end()); }
double KGrid::ky_extent() const { return *std::max_element(ky.begin(), ky.end()); }

AnnularSector AnnularSector::observed_from(const SceneGeometry& geom, const ScenePoint& p) {
  if (!(p.y_m > 0.0)) throw InvalidArgument("scene point must satisfy y > 0");
  const double half = 0.5 * geom.aperture_length_m;
  const double to_k = 4.0 * kPi / geom.propagation_speed_m_s;
  // Directions from aperture samples (x_a, 0) toward p sweep monotonically
  // from the x_a = -L/2 end to the x_a = +L/2 end.
  return {to_k * geom.min_frequency_hz(), to_k * geom.max_frequency_hz(),
          std::atan2(p.y_m, p.x_m + half), std::atan2(p.y_m, p.x_m - half)};
}

SpectralMask spectral_support(const SceneGeometry& geom, const ScenePoint& p, const KGrid& kgrid,
                              const SupportOptions& opts) {
  geom.validate();
  const auto sector = AnnularSector::observed_from(geom, p);
  const double kc2 = geom.carrier_wavenumber();

  // Bounding box of the continuous baseband sector.
  const double cos_lo = std::cos(sector.angle_min);
  const double cos_hi = std::cos(sector.angle_max);
  const double max_kx = sector.radius_max * std::max(std::abs(cos_lo), std::abs(cos_hi));
  const bool contains_broadside = sector.angle_min <= kPi / 2 && sector.angle_max >= kPi / 2;
  const double sin_max = contains_broadside
                             ? 1.0
                             : std::max(std::sin(sector.angle_min), std::sin(sector.angle_max));
  const double sin_min = std::min(std::sin(sector.angle_min), std::sin(sector.angle_max));
  const double max_ky = std::max(std::abs(sector.radius_max * sin_max - kc2),
                                 std::abs(sector.radius_min * sin_min - kc2));
  if (max_kx > kgrid.kx_extent() || max_ky > kgrid.ky_extent())
    throw NyquistViolation("support at (" + std::to_string(p.x_m) + ", " +
                           std::to_string(p.y_m) + ") reaches |kx|=" + std::to_string(max_kx) +
                           ", |ky|=" + std::to_string(max_ky) + " beyond grid extent (" +
                           std::to_string(kgrid.kx_extent()) + ", " +
                           std::to_string(kgrid.ky_extent()) + ")");

  // Baseband bounding box of the sector; samples outside it are skipped.
  const double kx_hi = (cos_lo >= 0.0 ? sector.radius_max : sector.radius_min) * cos_lo;
  const double kx_lo = (cos_hi <= 0.0 ? sector.radius_max : sector.radius_min) * cos_hi;
  const double ky_hi = sector.radius_max * sin_max - kc2;
  const double ky_lo = sector.radius_min * sin_min - kc2;

  SpectralMask mask(kgrid.nx() * kgrid.ny(), 0.0);
  for (std::size_t iy = 0; iy < kgrid.ny(); ++iy) {
    if (kgrid.ky[iy] < ky_lo || kgrid.ky[iy] > ky_hi) continue;
    const double ky_phys = kgrid.ky[iy] + kc2;
    for (std::size_t ix = 0; ix < kgrid.nx(); ++ix) {
      const double kx = kgrid.kx[ix];
      if (kx < kx_lo || kx > kx_hi) continue;
      const double r = std::hypot(kx, ky_phys);
      const double phi = std::atan2(ky_phys, kx);
      if (r < sector.radius_min || r > sector.radius_max || phi < sector.angle_min ||
          phi > sector.angle_max)
        continue;
      double w = 1.0;
      if (opts.taper_width > 0.0) {
        const double depth = std::min({r - sector.radius_min, sector.radius_max - r,
                                       r * std::sin(phi - sector.angle_min),
                                       r * std::sin(sector.angle_max - phi)});
        w = raised_cosine(depth, opts.taper_width);
      }
      mask[iy * kgrid.nx() + ix] = w;
    }
  }
  return mask;
}

ComplexImage psf_image(const SpectralMask& mask, const ImageGrid& grid) {
  if (mask.size() != grid.size()) throw ShapeError("mask size does not match grid");
  if (std::none_of(mask.begin(), mask.end(), [](double w) { return w != 0.0; }))
    throw EmptyMask("mask has no nonzero samples");
  ComplexImage spectrum(grid);
  for (std::size_t i = 0; i < mask.size(); ++i) spectrum[i] = mask[i];
  fft::inverse(spectrum);
  auto centered = circshift(spectrum, static_cast<std::ptrdiff_t>(grid.nx / 2),
                            static_cast<std::ptrdiff_t>(grid.ny / 2));
  centered *= 1.0 / centered.max_abs();
  return centered;
}

void BlockMaskBank::Block::set_mask(const SpectralMask& dense) {
  support.clear();
  weights.clear();
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      support.push_back(static_cast<std::uint32_t>(i));
      weights.push_back(dense[i]);
    }
  }
}

SpectralMask BlockMaskBank::Block::dense_mask(std::size_t n) const {
  SpectralMask m(n, 0.0);
  for (std::size_t j = 0; j < support.size(); ++j) m[support[j]] = weights[j];
  return m;
}

BlockMaskBank::BlockMaskBank(const SceneGeometry& geom, const ImageGrid& grid,
                             std::size_t block_nx, std::size_t block_ny, std::vector<Block> blocks,
                             double taper_width)
    : geom_(geom),
      grid_(grid),
      block_nx_(block_nx),
      block_ny_(block_ny),
      blocks_(std::move(blocks)),
      taper_width_(taper_width) {
  for (auto& b : blocks_) {
    double s = 0.0;
    for (double w : b.weights) s += w;
    b.gain = s / static_cast<double>(grid_.size());
  }
  validate();
}

std::size_t BlockMaskBank::block_of(std::size_t ix, std::size_t iy) const {
  return (iy / block_ny_) * (grid_.nx / block_nx_) + ix / block_nx_;
}

std::pair<std::size_t, std::size_t> BlockMaskBank::center_pixel(std::size_t b) const {
  return {blocks_[b].x0 + block_nx_ / 2, blocks_[b].y0 + block_ny_ / 2};
}

void BlockMaskBank::validate() const {
  grid_.validate();
  if (block_nx_ == 0 || block_ny_ == 0 || grid_.nx % block_nx_ != 0 || grid_.ny % block_ny_ != 0)
    throw InvalidArgument("blocks must tile the image exactly");
  const std::size_t expected = (grid_.nx / block_nx_) * (grid_.ny / block_ny_);
  if (blocks_.size() != expected)
    throw InvalidArgument("bank holds " + std::to_string(blocks_.size()) + " blocks, expected " +
                          std::to_string(expected));
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& blk = blocks_[b];
    if (blk.support.size() != blk.weights.size())
      throw ShapeError("mask of block " + std::to_string(b) + " is inconsistent");
    for (auto idx : blk.support)
      if (idx >= grid_.size())
        throw ShapeError("mask of block " + std::to_string(b) + " indexes past the grid");
    bool any = false;
    for (double w : blk.weights) {
      if (!(w >= 0.0 && w <= 1.0))
        throw InvalidArgument("mask weight outside [0,1] in block " + std::to_string(b));
      any = any || w > 0.0;
    }
    if (!any) throw EmptyMask("block " + std::to_string(b) + " has an empty mask");
    if (blk.x0 != (b % (grid_.nx / block_nx_)) * block_nx_ ||
        blk.y0 != (b / (grid_.nx / block_nx_)) * block_ny_)
      throw InvalidArgument("block " + std::to_string(b) + " is out of tiling order");
  }
}

BlockMaskBank build_bank(const SceneGeometry& geom, const ImageGrid& grid, std::size_t block_size,
                         const SupportOptions& opts) {
  grid.validate();
  if (block_size == 0 || grid.nx % block_size != 0 || grid.ny % block_size != 0)
    throw InvalidArgument("block size " + std::to_string(block_size) +
                          " does not divide the grid");
  const auto kgrid = KGrid::from(grid);
  const std::size_t bx_count = grid.nx / block_size;
  const std::size_t by_count = grid.ny / block_size;
  std::vector<BlockMaskBank::Block> blocks;
  blocks.reserve(bx_count * by_count);
  const double half = 0.5 * static_cast<double>(block_size - 1);
  for (std::size_t by = 0; by < by_count; ++by) {
    for (std::size_t bx = 0; bx < bx_count; ++bx) {
      BlockMaskBank::Block blk;
      blk.x0 = bx * block_size;
      blk.y0 = by * block_size;
      blk.center = grid.point_at(static_cast<double>(blk.x0) + half,
                                 static_cast<double>(blk.y0) + half);
      try {
        blk.set_mask(spectral_support(geom, blk.center, kgrid, opts));
      } catch (const NyquistViolation& e) {
        throw NyquistViolation("block " + std::to_string(blocks.size()) + ": " + e.what());
      }
      blocks.push_back(std::move(blk));
    }
  }
  return {geom, grid, block_size, block_size, std::move(blocks), opts.taper_width};
}

BlockMaskBank build_single_block_bank(const SceneGeometry& geom, const ImageGrid& grid,
                                      const ScenePoint& p, const SupportOptions& opts) {
  BlockMaskBank::Block blk;
  blk.center = p;
  blk.set_mask(spectral_support(geom, p, KGrid::from(grid), opts));
  return {geom, grid, grid.nx, grid.ny, {std::move(blk)}, opts.taper_width};
}

BlockMaskBank bank_from_mask(const SceneGeometry& geom, const ImageGrid& grid, SpectralMask mask) {
  BlockMaskBank::Block blk;
  blk.center = grid.point_at(static_cast<double>(grid.nx / 2), static_cast<double>(grid.ny / 2));
  if (mask.size() != grid.size()) throw ShapeError("mask size does not match grid");
  blk.set_mask(mask);
  return {geom, grid, grid.nx, grid.ny, {std::move(blk)}};
}

}  // namespace nfsar

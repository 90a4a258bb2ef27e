#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nfsar/geometry.hpp"
#include "nfsar/image.hpp"

namespace nfsar {

/// Wavenumber samples (rad/m) matching the unshifted DFT ordering of an
/// ImageGrid. Each axis covers (-pi/d, pi/d].
struct KGrid {
  std::vector<double> kx;
  std::vector<double> ky;

  static KGrid from(const ImageGrid& grid);
  std::size_t nx() const { return kx.size(); }
  std::size_t ny() const { return ky.size(); }
  double kx_extent() const;
  double ky_extent() const;
};

/// Real weight per k-sample, row-major in DFT order (ky major).
using SpectralMask = std::vector<double>;

/// Annular sector observed from a scene point. Radii are physical two-way
/// wavenumbers; angles are directions of the wavevector from +x.
struct AnnularSector {
  double radius_min = 0.0;
  double radius_max = 0.0;
  double angle_min = 0.0;
  double angle_max = 0.0;

  static AnnularSector observed_from(const SceneGeometry& geom, const ScenePoint& p);
  double angular_width() const { return angle_max - angle_min; }
};

struct SupportOptions {
  /// Raised-cosine edge taper width in rad/m; 0 gives a hard 0/1 mask.
  double taper_width = 0.0;
};

/// Observed wavenumber support of a point scatterer at `p`, shifted to
/// baseband by -(0, 2 k_c). Throws NyquistViolation if the support does not
/// fit inside the k-grid.
SpectralMask spectral_support(const SceneGeometry& geom, const ScenePoint& p, const KGrid& kgrid,
                              const SupportOptions& opts = {});

/// Spatial response of a mask: inverse DFT, circularly centred on pixel
/// (nx/2, ny/2), scaled to unit peak magnitude. Throws EmptyMask.
ComplexImage psf_image(const SpectralMask& mask, const ImageGrid& grid);

/// Tiling of the image into rectangular pixel blocks that share one mask.
class BlockMaskBank {
 public:
  /// Masks are stored sparsely (support indices plus weights); at paper
  /// scale a dense bank would need 1024 x 65536 samples.
  struct Block {
    std::size_t x0 = 0;  ///< first pixel column
    std::size_t y0 = 0;  ///< first pixel row
    ScenePoint center;   ///< scene point the mask was evaluated at
    std::vector<std::uint32_t> support;
    std::vector<double> weights;
    double gain = 0.0;   ///< peak of the block's impulse response, sum(mask)/N

    void set_mask(const SpectralMask& dense);
    SpectralMask dense_mask(std::size_t n) const;
  };

  BlockMaskBank() = default;
  BlockMaskBank(const SceneGeometry& geom, const ImageGrid& grid, std::size_t block_nx,
                std::size_t block_ny, std::vector<Block> blocks, double taper_width = 0.0);

  const SceneGeometry& geometry() const { return geom_; }
  const ImageGrid& grid() const { return grid_; }
  std::size_t block_nx() const { return block_nx_; }
  std::size_t block_ny() const { return block_ny_; }
  std::size_t block_count() const { return blocks_.size(); }
  const Block& block(std::size_t b) const { return blocks_[b]; }
  const std::vector<Block>& blocks() const { return blocks_; }
  double taper_width() const { return taper_width_; }
  /// Baseband offset (0, 2 k_c) removed from physical spectral coordinates.
  double baseband_center_ky() const { return geom_.carrier_wavenumber(); }

  /// Index of the block containing pixel (ix, iy).
  std::size_t block_of(std::size_t ix, std::size_t iy) const;
  /// Pixel nearest to the geometric centre of block `b`.
  std::pair<std::size_t, std::size_t> center_pixel(std::size_t b) const;

  /// Checks tiling, mask sizes, weight range and non-emptiness.
  void validate() const;

 private:
  SceneGeometry geom_;
  ImageGrid grid_;
  std::size_t block_nx_ = 0;
  std::size_t block_ny_ = 0;
  std::vector<Block> blocks_;
  double taper_width_ = 0.0;
};

/// One mask per block_size x block_size tile, evaluated at the tile centre.
BlockMaskBank build_bank(const SceneGeometry& geom, const ImageGrid& grid,
                         std::size_t block_size, const SupportOptions& opts = {});

/// Spatially invariant bank: one block covering the whole image with the
/// mask observed from `p`.
BlockMaskBank build_single_block_bank(const SceneGeometry& geom, const ImageGrid& grid,
                                      const ScenePoint& p, const SupportOptions& opts = {});

/// Single full-image block with an explicit mask (used for identity tests).
BlockMaskBank bank_from_mask(const SceneGeometry& geom, const ImageGrid& grid, SpectralMask mask);

}  // namespace nfsar

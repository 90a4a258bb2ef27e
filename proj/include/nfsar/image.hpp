#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "nfsar/geometry.hpp"

namespace nfsar {

using cplx = std::complex<double>;

/// Pixel lattice in scene coordinates. Pixel (ix, iy) sits at
/// (origin_x + ix*dx, origin_y + iy*dy); rows run along range (y).
struct ImageGrid {
  std::size_t nx = 64;
  std::size_t ny = 64;
  double dx_m = 0.01;
  double dy_m = 0.02;
  double origin_x_m = 0.0;
  double origin_y_m = 0.0;

  /// Grid whose pixel (nx/2, ny/2) lies exactly on (0, center_range).
  static ImageGrid centered(std::size_t nx, std::size_t ny, double dx, double dy,
                            double center_range_m);

  void validate() const;
  std::size_t size() const { return nx * ny; }
  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx + ix; }
  double x_at(double ix) const { return origin_x_m + ix * dx_m; }
  double y_at(double iy) const { return origin_y_m + iy * dy_m; }
  ScenePoint point_at(double ix, double iy) const { return {x_at(ix), y_at(iy)}; }

  bool operator==(const ImageGrid&) const = default;
};

/// Throws GridMismatch unless the two grids are identical.
void require_same_grid(const ImageGrid& a, const ImageGrid& b, const char* where);

/// Complex-valued image, row-major, double precision.
class ComplexImage {
 public:
  ComplexImage() = default;
  explicit ComplexImage(const ImageGrid& grid) : grid_(grid), data_(grid.size()) {}
  ComplexImage(const ImageGrid& grid, std::vector<cplx> samples);

  const ImageGrid& grid() const { return grid_; }
  std::size_t nx() const { return grid_.nx; }
  std::size_t ny() const { return grid_.ny; }
  std::size_t size() const { return data_.size(); }

  cplx& operator()(std::size_t ix, std::size_t iy) { return data_[iy * grid_.nx + ix]; }
  const cplx& operator()(std::size_t ix, std::size_t iy) const {
    return data_[iy * grid_.nx + ix];
  }
  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }

  std::span<cplx> samples() { return data_; }
  std::span<const cplx> samples() const { return data_; }
  std::vector<cplx>& vector() { return data_; }
  const std::vector<cplx>& vector() const { return data_; }

  bool all_finite() const;
  double norm_squared() const;
  double max_abs() const;
  /// Index of the largest-magnitude sample (first one on ties).
  std::size_t argmax_abs() const;

  ComplexImage& operator+=(const ComplexImage& o);
  ComplexImage& operator-=(const ComplexImage& o);
  ComplexImage& operator*=(cplx s);

 private:
  ImageGrid grid_;
  std::vector<cplx> data_;
};

ComplexImage operator+(ComplexImage a, const ComplexImage& b);
ComplexImage operator-(ComplexImage a, const ComplexImage& b);
ComplexImage operator*(cplx s, ComplexImage a);

/// <a, b> = sum conj(a) * b.
cplx inner(const ComplexImage& a, const ComplexImage& b);

/// Circular shift so that sample (0,0) moves to (sx, sy).
ComplexImage circshift(const ComplexImage& img, std::ptrdiff_t sx, std::ptrdiff_t sy);

}  // namespace nfsar

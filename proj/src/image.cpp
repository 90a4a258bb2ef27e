#include "nfsar/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nfsar/errors.hpp"

namespace nfsar {

namespace {
bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }
}  // namespace

ImageGrid ImageGrid::centered(std::size_t nx, std::size_t ny, double dx, double dy,
                              double center_range_m) {
  ImageGrid g;
  g.nx = nx;
  g.ny = ny;
  g.dx_m = dx;
  g.dy_m = dy;
  g.origin_x_m = -static_cast<double>(nx / 2) * dx;
  g.origin_y_m = center_range_m - static_cast<double>(ny / 2) * dy;
  return g;
}

void ImageGrid::validate() const {
  if (!is_pow2(nx) || !is_pow2(ny) || nx < 16 || ny < 16)
    throw InvalidArgument("grid dimensions must be powers of two and >= 16, got " +
                          std::to_string(nx) + "x" + std::to_string(ny));
  if (!(dx_m > 0.0) || !(dy_m > 0.0) || !std::isfinite(dx_m) || !std::isfinite(dy_m))
    throw InvalidArgument("pixel spacing must be positive");
}

void require_same_grid(const ImageGrid& a, const ImageGrid& b, const char* where) {
  if (!(a == b))
    throw GridMismatch(std::string(where) + ": image grids differ (" + std::to_string(a.nx) +
                       "x" + std::to_string(a.ny) + " vs " + std::to_string(b.nx) + "x" +
                       std::to_string(b.ny) + ")");
}

ComplexImage::ComplexImage(const ImageGrid& grid, std::vector<cplx> samples)
    : grid_(grid), data_(std::move(samples)) {
  if (data_.size() != grid_.size())
    throw ShapeError("sample count " + std::to_string(data_.size()) +
                     " does not match grid size " + std::to_string(grid_.size()));
}

bool ComplexImage::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const cplx& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

double ComplexImage::norm_squared() const {
  double s = 0.0;
  for (const auto& v : data_) s += std::norm(v);
  return s;
}

double ComplexImage::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

std::size_t ComplexImage::argmax_abs() const {
  std::size_t best = 0;
  double m = -1.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double a = std::norm(data_[i]);
    if (a > m) {
      m = a;
      best = i;
    }
  }
  return best;
}

ComplexImage& ComplexImage::operator+=(const ComplexImage& o) {
  require_same_grid(grid_, o.grid_, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexImage& ComplexImage::operator-=(const ComplexImage& o) {
  require_same_grid(grid_, o.grid_, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComplexImage& ComplexImage::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

ComplexImage operator+(ComplexImage a, const ComplexImage& b) { return a += b; }
ComplexImage operator-(ComplexImage a, const ComplexImage& b) { return a -= b; }
ComplexImage operator*(cplx s, ComplexImage a) { return a *= s; }

cplx inner(const ComplexImage& a, const ComplexImage& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

ComplexImage circshift(const ComplexImage& img, std::ptrdiff_t sx, std::ptrdiff_t sy) {
  const auto nx = static_cast<std::ptrdiff_t>(img.nx());
  const auto ny = static_cast<std::ptrdiff_t>(img.ny());
  ComplexImage out(img.grid());
  for (std::ptrdiff_t iy = 0; iy < ny; ++iy) {
    const auto ty = ((iy + sy) % ny + ny) % ny;
    for (std::ptrdiff_t ix = 0; ix < nx; ++ix) {
      const auto tx = ((ix + sx) % nx + nx) % nx;
      out(static_cast<std::size_t>(tx), static_cast<std::size_t>(ty)) =
          img(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy));
    }
  }
  return out;
}

}  // namespace nfsar

#pragma once

#include <cstddef>
#include <span>

#include "nfsar/image.hpp"

namespace nfsar::fft {

/// In-place 2-D DFT over a row-major ny x nx array, unnormalised:
/// X[k] = sum_n x[n] exp(-i k.n).
void forward(std::span<cplx> data, std::size_t nx, std::size_t ny);

/// In-place inverse 2-D DFT including the 1/(nx*ny) factor, so
/// inverse(forward(x)) == x.
void inverse(std::span<cplx> data, std::size_t nx, std::size_t ny);

inline void forward(ComplexImage& img) { forward(img.samples(), img.nx(), img.ny()); }
inline void inverse(ComplexImage& img) { inverse(img.samples(), img.nx(), img.ny()); }

}  // namespace nfsar::fft

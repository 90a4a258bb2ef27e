#pragma once

#include <vector>

#include "nfsar/geometry.hpp"
#include "nfsar/image.hpp"
#include "nfsar/scatterers.hpp"

namespace nfsar {

/// Stepped-frequency monostatic echoes, samples[a * Nf + f].
struct EchoMatrix {
  std::vector<double> aperture_positions_m;
  std::vector<double> frequencies_hz;
  std::vector<cplx> samples;

  std::size_t aperture_count() const { return aperture_positions_m.size(); }
  std::size_t frequency_count() const { return frequencies_hz.size(); }
  cplx& at(std::size_t a, std::size_t f) { return samples[a * frequencies_hz.size() + f]; }
  const cplx& at(std::size_t a, std::size_t f) const {
    return samples[a * frequencies_hz.size() + f];
  }
  void validate() const;
};

std::vector<double> aperture_positions(const SceneGeometry& geom);
std::vector<double> sweep_frequencies(const SceneGeometry& geom);

/// Checks that aperture and frequency sampling are unaliased over the grid:
/// aperture pitch <= lambda_min / (4 sin psi_max) and unambiguous range
/// c / (2 df) >= 2 * (range extent seen across the aperture). Throws SamplingError.
void validate_sampling(const SceneGeometry& geom, const ImageGrid& grid);

/// s[a][f] = sum_i a_i exp(-j 2 (2 pi f / c) R_a(x_i, y_i)).
EchoMatrix simulate_echo(const ScattererSet& scatterers, const SceneGeometry& geom);

/// Direct time-domain backprojection followed by carrier demodulation:
/// I(p) = 1/(Na Nf) sum_a sum_f s[a][f] exp(+j 2 k_f R_a(p)) exp(-j 2 k_c y_p).
ComplexImage backproject(const EchoMatrix& echo, const SceneGeometry& geom, const ImageGrid& grid);

}  // namespace nfsar

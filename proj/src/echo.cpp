#include "nfsar/echo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nfsar/errors.hpp"

namespace nfsar {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

}  // namespace

void EchoMatrix::validate() const {
  if (aperture_positions_m.size() < 2 || frequencies_hz.size() < 2)
    throw ShapeError("echo needs at least two aperture and two frequency samples");
  if (samples.size() != aperture_positions_m.size() * frequencies_hz.size())
    throw ShapeError("echo sample count does not match its axes");
  for (std::size_t i = 1; i < frequencies_hz.size(); ++i)
    if (!(frequencies_hz[i] > frequencies_hz[i - 1]))
      throw InvalidArgument("echo frequencies must be strictly increasing");
}

std::vector<double> aperture_positions(const SceneGeometry& geom) {
  return linspace(-0.5 * geom.aperture_length_m, 0.5 * geom.aperture_length_m,
                  geom.aperture_samples);
}

std::vector<double> sweep_frequencies(const SceneGeometry& geom) {
  return linspace(geom.min_frequency_hz(), geom.max_frequency_hz(), geom.frequency_samples);
}

void validate_sampling(const SceneGeometry& geom, const ImageGrid& grid) {
  geom.validate();
  grid.validate();
  const double half = 0.5 * geom.aperture_length_m;
  const double x_lo = grid.x_at(0.0), x_hi = grid.x_at(static_cast<double>(grid.nx - 1));
  const double y_lo = grid.y_at(0.0), y_hi = grid.y_at(static_cast<double>(grid.ny - 1));
  if (!(y_lo > 0.0)) throw SamplingError("scene must lie strictly in front of the aperture");

  // Largest off-broadside angle between any aperture sample and any pixel.
  double sin_psi = 0.0;
  double r_min = std::numeric_limits<double>::infinity(), r_max = 0.0;
  for (double xa : {-half, half}) {
    for (double xp : {x_lo, x_hi}) {
      for (double yp : {y_lo, y_hi}) {
        const double r = std::hypot(xp - xa, yp);
        sin_psi = std::max(sin_psi, std::abs(xp - xa) / r);
        r_max = std::max(r_max, r);
      }
    }
  }
  // Closest approach may be interior to the aperture.
  for (double xp : {x_lo, x_hi, 0.0}) {
    const double xa = std::clamp(xp, -half, half);
    if (xp < x_lo || xp > x_hi) continue;
    r_min = std::min(r_min, std::hypot(xp - xa, y_lo));
  }

  const double lambda_min = geom.propagation_speed_m_s / geom.max_frequency_hz();
  const double pitch = geom.aperture_length_m / static_cast<double>(geom.aperture_samples - 1);
  const double pitch_limit = lambda_min / (4.0 * sin_psi);
  if (pitch > pitch_limit)
    throw SamplingError("aperture pitch " + std::to_string(pitch) + " m exceeds " +
                        std::to_string(pitch_limit) + " m for this scene; raise aperture_samples");

  const double df = geom.bandwidth_hz / static_cast<double>(geom.frequency_samples - 1);
  const double unambiguous = geom.propagation_speed_m_s / (2.0 * df);
  const double depth = r_max - r_min;
  if (unambiguous < 2.0 * depth)
    throw SamplingError("unambiguous range " + std::to_string(unambiguous) +
                        " m is below twice the scene depth " + std::to_string(depth) +
                        " m; raise frequency_samples");
}

EchoMatrix simulate_echo(const ScattererSet& scatterers, const SceneGeometry& geom) {
  geom.validate();
  if (scatterers.empty()) throw EmptyScatterers("no scatterers to simulate");
  EchoMatrix echo;
  echo.aperture_positions_m = aperture_positions(geom);
  echo.frequencies_hz = sweep_frequencies(geom);
  echo.samples.assign(geom.aperture_samples * geom.frequency_samples, cplx{});
  const double to_k2 = 4.0 * kPi / geom.propagation_speed_m_s;
  for (const auto& s : scatterers) {
    if (!(s.y_m > 0.0)) throw OutOfBounds("scatterer must satisfy y > 0");
  }
  for (std::size_t a = 0; a < echo.aperture_count(); ++a) {
    const double xa = echo.aperture_positions_m[a];
    for (std::size_t f = 0; f < echo.frequency_count(); ++f) {
      const double k2 = to_k2 * echo.frequencies_hz[f];
      cplx acc{};
      for (const auto& s : scatterers) {
        const double r = std::hypot(s.x_m - xa, s.y_m);
        acc += s.amplitude * std::polar(1.0, -k2 * r);
      }
      echo.at(a, f) = acc;
    }
  }
  return echo;
}

ComplexImage backproject(const EchoMatrix& echo, const SceneGeometry& geom, const ImageGrid& grid) {
  echo.validate();
  grid.validate();
  if (echo.aperture_count() != geom.aperture_samples ||
      echo.frequency_count() != geom.frequency_samples)
    throw GridMismatch("echo dimensions do not match the scene geometry");

  const std::size_t na = echo.aperture_count();
  const std::size_t nf = echo.frequency_count();
  const double to_k2 = 4.0 * kPi / geom.propagation_speed_m_s;
  const double k2_first = to_k2 * echo.frequencies_hz.front();
  // Frequencies are uniform, so sum_f s_f exp(j 2 k_f R) is a polynomial in
  // exp(j 2 dk R) evaluated by Horner's rule.
  const double dk2 = to_k2 * (echo.frequencies_hz.back() - echo.frequencies_hz.front()) /
                     static_cast<double>(nf - 1);
  const double kc2 = geom.carrier_wavenumber();
  const double norm = 1.0 / static_cast<double>(na * nf);

  ComplexImage img(grid);
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    const double yp = grid.y_at(static_cast<double>(iy));
    const cplx demod = std::polar(1.0, -kc2 * yp);
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      const double xp = grid.x_at(static_cast<double>(ix));
      cplx pixel{};
      for (std::size_t a = 0; a < na; ++a) {
        const double r = std::hypot(xp - echo.aperture_positions_m[a], yp);
        const cplx z = std::polar(1.0, dk2 * r);
        const cplx* row = &echo.samples[a * nf];
        cplx acc = row[nf - 1];
        for (std::size_t f = nf - 1; f-- > 0;) acc = acc * z + row[f];
        pixel += acc * std::polar(1.0, k2_first * r);
      }
      img(ix, iy) = pixel * demod * norm;
    }
  }
  return img;
}

}  // namespace nfsar

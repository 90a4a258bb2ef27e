#include "nfsar/geometry.hpp"

#include <cmath>
#include <string>

#include "nfsar/errors.hpp"

namespace nfsar {

void SceneGeometry::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(center_frequency_hz) || !positive(bandwidth_hz) ||
      bandwidth_hz >= 2.0 * center_frequency_hz)
    throw InvalidArgument("band must satisfy 0 < B < 2 f_c");
  if (!positive(aperture_length_m) || !positive(center_range_m) ||
      !positive(propagation_speed_m_s))
    throw InvalidArgument("aperture length, range and propagation speed must be positive");
  if (aperture_samples < 2 || frequency_samples < 2)
    throw InvalidArgument("need at least two aperture and two frequency samples");
}

double SceneGeometry::carrier_wavenumber() const {
  return 4.0 * kPi * center_frequency_hz / propagation_speed_m_s;
}

ResolutionEstimate boresight_resolution(const SceneGeometry& geom) {
  geom.validate();
  return {geom.wavelength_m() * geom.center_range_m / (2.0 * geom.aperture_length_m),
          geom.propagation_speed_m_s / (2.0 * geom.bandwidth_hz)};
}

double synthetic_angle(const SceneGeometry& geom, const ScenePoint& p) {
  if (!(p.y_m > 0.0)) throw InvalidArgument("scene point must satisfy y > 0");
  const double half = 0.5 * geom.aperture_length_m;
  return std::atan2(p.x_m + half, p.y_m) - std::atan2(p.x_m - half, p.y_m);
}

double view_angle(const SceneGeometry&, const ScenePoint& p) {
  if (!(p.y_m > 0.0)) throw InvalidArgument("scene point must satisfy y > 0");
  return std::atan2(p.y_m, p.x_m);
}

double local_azimuth_resolution(const SceneGeometry& geom, const ScenePoint& p) {
  return geom.wavelength_m() / (4.0 * std::sin(0.5 * synthetic_angle(geom, p)));
}

}  // namespace nfsar

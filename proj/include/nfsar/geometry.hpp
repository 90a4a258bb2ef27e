#pragma once

#include <cstddef>

namespace nfsar {

inline constexpr double kSpeedOfLight = 2.99792458e8;
inline constexpr double kPi = 3.14159265358979323846;

/// Linear-aperture near-field acquisition. The aperture lies on the x axis
/// at y = 0 spanning [-L/2, L/2]; the scene is centred on (0, R).
struct SceneGeometry {
  double center_frequency_hz = 10e9;
  double bandwidth_hz = 2e9;
  double aperture_length_m = 2.0;
  double center_range_m = 3.0;
  double propagation_speed_m_s = kSpeedOfLight;
  std::size_t aperture_samples = 256;
  std::size_t frequency_samples = 64;

  /// Throws InvalidArgument when the band or aperture is unphysical.
  void validate() const;

  double wavelength_m() const { return propagation_speed_m_s / center_frequency_hz; }
  double min_frequency_hz() const { return center_frequency_hz - 0.5 * bandwidth_hz; }
  double max_frequency_hz() const { return center_frequency_hz + 0.5 * bandwidth_hz; }
  /// Two-way carrier wavenumber 2*k_c (rad/m); images are stored demodulated by it.
  double carrier_wavenumber() const;
};

struct ResolutionEstimate {
  double azimuth_resolution_m = 0.0;
  double range_resolution_m = 0.0;
};

struct ScenePoint {
  double x_m = 0.0;
  double y_m = 0.0;
};

/// Classical boresight resolution: d_x = lambda R / 2L, d_y = c / 2B.
ResolutionEstimate boresight_resolution(const SceneGeometry& geom);

/// Angle subtended at `p` by the two aperture endpoints, in (0, pi).
double synthetic_angle(const SceneGeometry& geom, const ScenePoint& p);

/// Direction from the aperture centre to `p`, measured from +x. Boresight is pi/2.
double view_angle(const SceneGeometry& geom, const ScenePoint& p);

/// Off-boresight azimuth resolution, lambda / (4 sin(dtheta / 2)).
double local_azimuth_resolution(const SceneGeometry& geom, const ScenePoint& p);

}  // namespace nfsar

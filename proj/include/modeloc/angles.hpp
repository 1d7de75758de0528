#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace modeloc {

/// Maps any angle in degrees onto (-180, 180]; +180 stays +180 and -180 maps to +180.
inline double wrap_degrees(double deg) {
  return deg - 360.0 * std::ceil((deg - 180.0) / 360.0);
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

inline double arg_degrees(std::complex<double> z) {
  return wrap_degrees(rad_to_deg(std::arg(z)));
}

inline std::complex<double> polar_degrees(double magnitude, double angle_deg) {
  return std::polar(magnitude, deg_to_rad(angle_deg));
}

}  // namespace modeloc

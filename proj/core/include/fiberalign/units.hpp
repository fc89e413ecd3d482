#pragma once

// Angle conventions shared across the bench model. Everything internal is SI
// (radians, meters, watts, seconds); arcseconds only appear at configuration
// boundaries because piezo step sizes are quoted that way.

namespace fiberalign {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// 1 arcsecond = pi / (180 * 3600) rad
inline constexpr double kArcsecRad = kPi / 648000.0;

constexpr double arcsec_to_rad(double arcsec) { return arcsec * kArcsecRad; }
constexpr double rad_to_arcsec(double rad) { return rad / kArcsecRad; }

}  // namespace fiberalign

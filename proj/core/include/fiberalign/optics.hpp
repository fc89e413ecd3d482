#pragma once

// Free-space Gaussian beam coupling model.
//
// Fields are fundamental-mode Gaussians at the fiber/collimator interface,
//   E(x, y) = A * exp(-(x^2 + y^2) / w^2),
// and the power coupling between two modes is the normalized overlap
//   T = |integral(E1 * E2)|^2 / (integral(|E1|^2) * integral(|E2|^2)).
// For coaxial beams with differing waists this has the closed form
//   T = (2 w1 w2 / (w1^2 + w2^2))^2,
// which is what the numerical quadrature is checked against.
//
// Angular misalignment of an otherwise matched pair rolls off as
//   eta(theta) = T_base * exp(-(pi * w * theta / lambda)^2),
// so lambda / (pi * w) is the e-folding angle of the coupling.

#include <stdexcept>

namespace fiberalign {

struct GaussianBeam {
  double amplitude = 1.0;    // field amplitude, arbitrary units
  double waist_radius_m = 0.0;
  double wavelength_m = 0.0;

  // Radial field profile at distance r from the beam axis.
  double field_at(double r_m) const;

  void validate() const;  // throws std::invalid_argument
};

struct CouplingModel {
  double base_efficiency = 0.0;  // peak coupling T_base, in (0, 1]
  double waist_radius_m = 0.0;
  double wavelength_m = 0.0;

  // e-folding angle lambda / (pi * w) of the angular rolloff.
  double efold_angle_rad() const;

  void validate() const;  // throws std::invalid_argument
};

// Normalized mode overlap of two coaxial beams by 2-D midpoint quadrature on a
// square grid spanning [-grid_half_width, grid_half_width] per axis.
// Requires grid_half_width >= 4x the larger waist and grid_points >= 128;
// with those bounds the result matches the closed form to well under 1e-6.
double mode_overlap_numeric(const GaussianBeam& a, const GaussianBeam& b,
                            double grid_half_width_m, int grid_points);

// Convenience overload: 4x larger-waist half-width, 256 points per axis.
double mode_overlap_numeric(const GaussianBeam& a, const GaussianBeam& b);

// Closed-form overlap (2 w1 w2 / (w1^2 + w2^2))^2 for coaxial beams.
double waist_mismatch_efficiency(double waist_a_m, double waist_b_m);

// Coupling efficiency at angular offset theta.
double angular_efficiency(const CouplingModel& model, double theta_rad);

// Inverse of angular_efficiency: the |theta| that produces the given
// efficiency. Domain error if efficiency is outside (0, base_efficiency].
double invert_angle(const CouplingModel& model, double efficiency);

}  // namespace fiberalign

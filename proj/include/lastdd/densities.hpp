#pragma once

// Densities of the last drawdown of dX = mu dt + dW on [0, T].
//
// Length l = T - (last time the maximum is attained), depth d = max - X_T.
// All integrals over l use l = T sin^2(theta), which turns the inverse
// square-root singularities at l = 0 and l = T into smooth integrands.

#include "lastdd/quadrature.hpp"

namespace lastdd {

/// The model: drift per sqrt(year) once volatility is normalized to one
/// (so sharpe == mu), and the observation horizon in years.
struct ProcessSpec {
  double sharpe = 0.0;
  double horizon = 1.0;

  /// Throws DomainError unless horizon > 0 and both fields are finite.
  void validate() const;
};

namespace densities {

/// rho(l): density of the last-drawdown length, per year. 0 < l < T.
double rho_length(const ProcessSpec& spec, double length);

/// Joint density g(d, l) of depth and length, with the level of the maximum
/// integrated out. d > 0, 0 < l < T.
double joint_dl_density(const ProcessSpec& spec, double depth, double length);

/// psi(d) = integral of g(d, l) over l in (0, T). d > 0.
double psi_depth(const ProcessSpec& spec, double depth);

/// P(length >= l) for 0 <= l <= T.
double length_tail_prob(const ProcessSpec& spec, double length);

/// P(depth >= d) for d >= 0.
double depth_tail_prob(const ProcessSpec& spec, double depth);

/// Integral of g(d, l) over l in [l_lo, l_hi], 0 <= l_lo <= l_hi <= T.
/// Numerator of the conditional length law given the depth.
double joint_length_mass(const ProcessSpec& spec, double depth, double l_lo,
                         double l_hi);

/// Angle theta with l = T sin^2(theta).
double length_to_angle(double horizon, double length);
double angle_to_length(double horizon, double theta);

/// Integrands in the angle variable (density times dl/dtheta). These are the
/// smooth functions the quadratures actually see; exposed for tests.
double rho_length_angle(const ProcessSpec& spec, double theta);
double joint_dl_density_angle(const ProcessSpec& spec, double depth,
                              double theta);
double depth_tail_angle(const ProcessSpec& spec, double depth, double theta);

/// Tolerances used by every quadrature in this module.
quad::Options quadrature_options();

}  // namespace densities
}  // namespace lastdd

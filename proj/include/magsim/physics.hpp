#pragma once

#include <numbers>

namespace magsim {

/// Physical constants of the coupled-magnet rig. SI units throughout.
struct PhysicalParams {
  double mu0 = 4.0 * std::numbers::pi * 1e-7;  // magnetic permeability, T*m/A
  double magnetization_M = 1.05e6;             // A/m, sintered NdFeB
  // Coupling constant of the lateral force law. Starts at the energy-density
  // value mu0*M^2/2; `calibrate` rescales it against the static detachment
  // window.
  double coupling_Kd = 0.5 * mu0 * magnetization_M * magnetization_M;
  double radius_R = 0.0125;      // magnet radius, m
  double height_h = 0.01;        // magnet height (thickness), m
  double separation_d = 0.012;   // vertical gap: casing + rings, m
  double mass_bottom_m1 = 0.35;  // kg, magnet + carriage + reflected drive inertia
  double mass_top_m2 = 0.30;     // kg, magnet + armrest + hand load
  double fric_coulomb_Fc = 0.3;         // N
  double fric_static_Fs = 0.6;          // N
  double stribeck_vel_vs = 0.005;       // m/s
  double fric_viscous_Kv_top = 1.0;     // N*s/m
  double fric_viscous_Kv_bottom = 3.0;  // N*s/m
  double sgn_smoothing_eps = 1e-3;      // m/s, smooth-sign width

  /// Throws std::invalid_argument listing every violated constraint.
  void validate() const;
};

/// Geometry term of the coupling force: 1/d^2 + 1/(d+2h)^2 - 2/(d+h)^2, 1/m^2.
double geometric_factor(double gap, double height);

/// tanh(v/eps): odd, saturating, differentiable stand-in for sgn(v).
double smooth_sign(double velocity, double eps);

/// Lateral restoring force on the top magnet, N. Odd in the offset
/// (bottom_pos - top_pos); the bottom magnet sees the exact negation.
double lateral_magnetic_force(double bottom_pos, double top_pos,
                              const PhysicalParams& params);

/// Stribeck stick-slip friction opposing top-magnet motion, N. Odd in velocity.
double stribeck_friction(double velocity, const PhysicalParams& params);

/// Viscous friction opposing bottom-magnet motion, N.
double viscous_friction(double velocity, const PhysicalParams& params);

/// Offset at which the restoring force peaks. Past it the coupling weakens
/// with distance and cannot re-align the magnets on its own.
double peak_restoring_offset(const PhysicalParams& params);

/// Offset at which the (clamped) force law reaches zero; the magnets are
/// treated as decoupled beyond it.
double coupling_extent(const PhysicalParams& params);

}  // namespace magsim

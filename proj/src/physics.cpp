#include "magsim/physics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace magsim {

void PhysicalParams::validate() const {
  std::string errors;
  auto require = [&errors](bool ok, const char* what) {
    if (!ok) {
      errors += errors.empty() ? "" : "; ";
      errors += what;
    }
  };
  require(mu0 > 0.0, "mu0 must be positive");
  require(magnetization_M >= 0.0, "magnetization_M must be non-negative");
  require(coupling_Kd >= 0.0, "coupling_Kd must be non-negative");
  require(radius_R > 0.0, "radius_R must be positive");
  require(height_h > 0.0, "height_h must be positive");
  require(separation_d > 0.0, "separation_d must be positive");
  require(mass_bottom_m1 > 0.0, "mass_bottom_m1 must be positive");
  require(mass_top_m2 > 0.0, "mass_top_m2 must be positive");
  require(fric_coulomb_Fc >= 0.0, "fric_coulomb_Fc must be non-negative");
  require(fric_static_Fs >= fric_coulomb_Fc,
          "fric_static_Fs must be >= fric_coulomb_Fc");
  require(stribeck_vel_vs > 0.0, "stribeck_vel_vs must be positive");
  require(fric_viscous_Kv_top >= 0.0, "fric_viscous_Kv_top must be non-negative");
  require(fric_viscous_Kv_bottom >= 0.0,
          "fric_viscous_Kv_bottom must be non-negative");
  require(sgn_smoothing_eps > 0.0, "sgn_smoothing_eps must be positive");
  if (!errors.empty()) {
    throw std::invalid_argument("invalid PhysicalParams: " + errors);
  }
}

double geometric_factor(double gap, double height) {
  if (!(gap > 0.0)) {
    throw std::domain_error("geometric_factor: gap must be positive, got " +
                            std::to_string(gap));
  }
  if (height < 0.0) {
    throw std::domain_error("geometric_factor: height must be non-negative, got " +
                            std::to_string(height));
  }
  const double near = 1.0 / (gap * gap);
  const double far = 1.0 / ((gap + 2.0 * height) * (gap + 2.0 * height));
  const double mid = 2.0 / ((gap + height) * (gap + height));
  return near + far - mid;
}

double smooth_sign(double velocity, double eps) {
  return std::tanh(velocity / eps);
}

namespace {

// Force magnitude for a non-negative offset. The quadratic bracket is a
// truncated expansion that turns repulsive past its zero crossing; it is
// clamped there, so the magnets are decoupled beyond coupling_extent().
double restoring_force_magnitude(double offset_mag, const PhysicalParams& p) {
  const double a = geometric_factor(p.separation_d, p.height_h);
  const double r2 = p.radius_R * p.radius_R;
  const double prefactor = 0.5 * std::numbers::pi * p.coupling_Kd * r2 * r2;
  const double bracket = a - 1.5 * offset_mag * offset_mag * a * a;
  if (bracket <= 0.0) {
    return 0.0;
  }
  return prefactor * bracket * std::atan(offset_mag / p.separation_d);
}

}  // namespace

double lateral_magnetic_force(double bottom_pos, double top_pos,
                              const PhysicalParams& params) {
  const double offset = bottom_pos - top_pos;
  const double magnitude = restoring_force_magnitude(std::abs(offset), params);
  return std::copysign(magnitude, offset);
}

double stribeck_friction(double velocity, const PhysicalParams& params) {
  const double speed = std::abs(velocity);
  const double ratio = speed / params.stribeck_vel_vs;
  const double level = params.fric_coulomb_Fc +
                       (params.fric_static_Fs - params.fric_coulomb_Fc) *
                           std::exp(-ratio * ratio);
  const double magnitude = level * std::tanh(speed / params.sgn_smoothing_eps) +
                           params.fric_viscous_Kv_top * speed;
  return std::copysign(magnitude, velocity);
}

double viscous_friction(double velocity, const PhysicalParams& params) {
  return params.fric_viscous_Kv_bottom * velocity;
}

double coupling_extent(const PhysicalParams& params) {
  const double a = geometric_factor(params.separation_d, params.height_h);
  return std::sqrt(2.0 / (3.0 * a));
}

double peak_restoring_offset(const PhysicalParams& params) {
  const double upper = coupling_extent(params);
  auto force = [&params](double offset) {
    return restoring_force_magnitude(offset, params);
  };

  // Coarse grid locates the maximum, golden-section refines it.
  constexpr int kGridPoints = 128;
  int best = 0;
  double best_force = 0.0;
  for (int i = 0; i <= kGridPoints; ++i) {
    const double offset = upper * i / kGridPoints;
    const double f = force(offset);
    if (f > best_force) {
      best_force = f;
      best = i;
    }
  }
  double lo = upper * (best > 0 ? best - 1 : 0) / kGridPoints;
  double hi = upper * (best < kGridPoints ? best + 1 : kGridPoints) / kGridPoints;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = force(a);
  double fb = force(b);
  while (hi - lo > 1e-12) {
    if (fa > fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = force(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = force(b);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace magsim

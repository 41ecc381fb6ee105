#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "magsim/physics.hpp"

using namespace magsim;

TEST_CASE("geometric factor matches direct arithmetic") {
  // 1/0.006^2 + 1/0.026^2 - 2/0.016^2
  CHECK(geometric_factor(0.006, 0.01) == doctest::Approx(21444.5677).epsilon(1e-7));
  // Degenerate zero-height magnet cancels exactly.
  CHECK(geometric_factor(0.01, 0.0) == 0.0);
  // Monotone decay toward zero at large separation.
  CHECK(geometric_factor(1000.0, 0.01) < 1e-5);
  double prev = geometric_factor(0.004, 0.01);
  for (double gap = 0.005; gap < 0.1; gap += 0.002) {
    const double value = geometric_factor(gap, 0.01);
    CHECK(value < prev);
    CHECK(value >= 0.0);
    prev = value;
  }
}

TEST_CASE("geometric factor rejects bad arguments") {
  CHECK_THROWS_AS(geometric_factor(0.0, 0.01), std::domain_error);
  CHECK_THROWS_AS(geometric_factor(-1.0, 0.01), std::domain_error);
  CHECK_THROWS_AS(geometric_factor(0.01, -0.1), std::domain_error);
}

TEST_CASE("lateral magnetic force is zero when aligned and odd in the offset") {
  PhysicalParams p;
  CHECK(lateral_magnetic_force(0.25, 0.25, p) == 0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double delta = 0.02 * i / 1000.0;
    const double plus = lateral_magnetic_force(0.3 + delta, 0.3, p);
    const double minus = lateral_magnetic_force(0.3 - delta, 0.3, p);
    CHECK(plus == -minus);  // bit-exact oddness
  }
}

TEST_CASE("restoring force pulls a lagging follower forward") {
  PhysicalParams p;
  CHECK(lateral_magnetic_force(0.31, 0.30, p) > 0.0);
  CHECK(lateral_magnetic_force(0.29, 0.30, p) < 0.0);
}

TEST_CASE("force law decays to zero beyond the coupling extent") {
  PhysicalParams p;
  const double extent = coupling_extent(p);
  CHECK(lateral_magnetic_force(0.3 + extent * 1.01, 0.3, p) == 0.0);
  CHECK(lateral_magnetic_force(0.3 + extent * 0.99, 0.3, p) > 0.0);
}

TEST_CASE("calibrated peak force sits inside the static detachment window") {
  PhysicalParams p;
  // Same linear rescaling the calibrate command performs.
  const double target = 1.45 * 9.81;
  const double peak0 =
      lateral_magnetic_force(peak_restoring_offset(p), 0.0, p);
  p.coupling_Kd *= target / peak0;

  // Fine sweep locates the maximum restoring force.
  double best = 0.0;
  const double extent = coupling_extent(p);
  for (int i = 0; i <= 20000; ++i) {
    best = std::max(best, lateral_magnetic_force(extent * i / 20000.0, 0.0, p));
  }
  CHECK(best >= 1.2 * 9.81);
  CHECK(best <= 1.7 * 9.81);
  CHECK(best == doctest::Approx(target).epsilon(1e-6));
}

TEST_CASE("peak finder agrees with a brute-force sweep") {
  PhysicalParams p;
  const double peak = peak_restoring_offset(p);
  const double extent = coupling_extent(p);
  double best_offset = 0.0;
  double best_force = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double offset = extent * i / 200000.0;
    const double f = lateral_magnetic_force(offset, 0.0, p);
    if (f > best_force) {
      best_force = f;
      best_offset = offset;
    }
  }
  CHECK(peak == doctest::Approx(best_offset).epsilon(1e-4));
  CHECK(peak < extent);
}

TEST_CASE("stribeck friction matches the closed-form sample") {
  PhysicalParams p;
  p.fric_coulomb_Fc = 0.5;
  p.fric_static_Fs = 1.0;
  p.stribeck_vel_vs = 0.01;
  p.fric_viscous_Kv_top = 2.0;
  p.sgn_smoothing_eps = 1e-6;  // well below vs, tanh saturates
  // 0.5 + 0.5*e^-1 + 0.02
  CHECK(stribeck_friction(0.01, p) == doctest::Approx(0.70394).epsilon(1e-4));
  CHECK(stribeck_friction(0.0, p) == 0.0);
}

TEST_CASE("stribeck friction tends to coulomb plus viscous at speed") {
  PhysicalParams p;
  for (double v = std::sqrt(5.0) * p.stribeck_vel_vs * 1.01; v < 0.2; v *= 1.5) {
    const double expected = p.fric_coulomb_Fc + p.fric_viscous_Kv_top * v;
    CHECK(stribeck_friction(v, p) == doctest::Approx(expected).epsilon(0.01));
  }
}

TEST_CASE("stribeck friction is odd and bounded") {
  PhysicalParams p;
  for (int i = 1; i <= 1000; ++i) {
    const double v = 0.1 * i / 1000.0;
    const double plus = stribeck_friction(v, p);
    CHECK(plus == -stribeck_friction(-v, p));
    CHECK(std::abs(plus) <= p.fric_static_Fs + p.fric_viscous_Kv_top * v);
    CHECK(std::abs(plus) >=
          p.fric_coulomb_Fc * std::tanh(v / p.sgn_smoothing_eps));
  }
}

TEST_CASE("stribeck level approaches the static value at vanishing speed") {
  PhysicalParams p;
  const double v = p.sgn_smoothing_eps / 10.0;  // exponential term still ~1
  const double expected = p.fric_static_Fs * smooth_sign(v, p.sgn_smoothing_eps) +
                          p.fric_viscous_Kv_top * v;
  CHECK(stribeck_friction(v, p) == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("viscous friction is linear and odd") {
  PhysicalParams p;
  p.fric_viscous_Kv_bottom = 3.0;
  CHECK(viscous_friction(0.0, p) == 0.0);
  CHECK(viscous_friction(0.02, p) == doctest::Approx(0.06));
  for (int i = 1; i <= 1000; ++i) {
    const double v = 0.1 * i / 1000.0;
    CHECK(viscous_friction(v, p) == -viscous_friction(-v, p));
    CHECK(viscous_friction(2.0 * v, p) == doctest::Approx(2.0 * viscous_friction(v, p)));
  }
}

TEST_CASE("parameter validation names violations") {
  PhysicalParams p;
  p.radius_R = -1.0;
  p.stribeck_vel_vs = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(),
                       doctest::Contains("radius_R"), std::invalid_argument);
  PhysicalParams q;
  q.fric_static_Fs = 0.1;
  q.fric_coulomb_Fc = 0.2;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  PhysicalParams ok;
  CHECK_NOTHROW(ok.validate());
}

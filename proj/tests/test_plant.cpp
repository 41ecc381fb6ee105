#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "magsim/plant.hpp"

using namespace magsim;

namespace {

// Potential of the restoring force, by Simpson quadrature. Test-side oracle.
double magnetic_potential(double offset, const PhysicalParams& p) {
  const int n = 400;  // even
  const double h = offset / n;
  double sum = lateral_magnetic_force(0.0, 0.0, p) +
               lateral_magnetic_force(offset, 0.0, p);
  for (int i = 1; i < n; ++i) {
    sum += (i % 2 == 1 ? 4.0 : 2.0) * lateral_magnetic_force(i * h, 0.0, p);
  }
  return sum * h / 3.0;
}

double mechanical_energy(const PlantState& s, const PhysicalParams& p) {
  return 0.5 * p.mass_bottom_m1 * s.bottom_vel * s.bottom_vel +
         0.5 * p.mass_top_m2 * s.top_vel * s.top_vel +
         magnetic_potential(std::abs(s.bottom_pos - s.top_pos), p);
}

}  // namespace

TEST_CASE("net forces vanish at full equilibrium") {
  PhysicalParams p;
  const PlantState rest{0.3, 0.0, 0.3, 0.0, 0.0};
  const auto [f1, f2] = net_forces(rest, 0.0, p);
  CHECK(f1 == 0.0);
  CHECK(f2 == 0.0);
}

TEST_CASE("aligned magnets at rest pass the motor force straight through") {
  PhysicalParams p;
  const PlantState rest{0.3, 0.0, 0.3, 0.0, 0.0};
  const auto [f1, f2] = net_forces(rest, 5.0, p);
  CHECK(f1 == 5.0);
  CHECK(f2 == 0.0);
}

TEST_CASE("magnetic terms cancel in the force sum at random states") {
  PhysicalParams p;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> pos(0.1, 0.5);
  std::uniform_real_distribution<double> vel(-0.05, 0.05);
  std::uniform_real_distribution<double> force(-5.0, 5.0);
  Disturbance dist;
  dist.schedule = {{0.0, 100.0, 2.0, 0.0, 0.0}};
  for (int i = 0; i < 200; ++i) {
    const PlantState s{pos(rng), vel(rng), pos(rng), vel(rng), 1.0};
    const double u = force(rng);
    const auto [f1, f2] = net_forces(s, u, p, dist);
    const double resist = dist.resist_force_at(s.time) *
                          smooth_sign(s.top_vel, dist.velocity_scale);
    const double expected = u - viscous_friction(s.bottom_vel, p) -
                            stribeck_friction(s.top_vel, p) - resist;
    CHECK(f1 + f2 == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("magnetic force pair sums to exactly zero") {
  PhysicalParams p;
  for (int i = 0; i < 1000; ++i) {
    const double delta = -0.02 + 0.04 * i / 999.0;
    const PlantState s{0.3 + delta, 0.0, 0.3, 0.0, 0.0};
    const auto [f1, f2] = net_forces(s, 0.0, p);
    CHECK(f1 + f2 == 0.0);  // friction vanishes at rest, magnetics cancel
  }
}

TEST_CASE("derivatives return kinematic identities and scaled forces") {
  PhysicalParams p;
  const PlantState rest{0.3, 0.0, 0.3, 0.0, 0.0};
  const StateDeriv zero = derivatives(rest, 0.0, p);
  CHECK(zero.bottom_vel == 0.0);
  CHECK(zero.bottom_acc == 0.0);
  CHECK(zero.top_vel == 0.0);
  CHECK(zero.top_acc == 0.0);

  const PlantState moving{0.3, 0.02, 0.3, -0.01, 0.0};
  const StateDeriv d = derivatives(moving, 1.0, p);
  CHECK(d.bottom_vel == 0.02);
  CHECK(d.top_vel == -0.01);
  const auto [f1, f2] = net_forces(moving, 1.0, p);
  CHECK(d.bottom_acc == doctest::Approx(f1 / p.mass_bottom_m1));
  CHECK(d.top_acc == doctest::Approx(f2 / p.mass_top_m2));
}

TEST_CASE("exact equilibrium is a fixed point of the integrator") {
  PhysicalParams p;
  const PlantState rest{0.3, 0.0, 0.3, 0.0, 0.0};
  const PlantState next = step(rest, 0.0, 1e-3, p);
  CHECK(next.bottom_pos == 0.3);
  CHECK(next.bottom_vel == 0.0);
  CHECK(next.top_pos == 0.3);
  CHECK(next.top_vel == 0.0);
  CHECK(next.time == doctest::Approx(1e-3));
}

TEST_CASE("mechanical energy decays without input") {
  PhysicalParams p;
  PlantState s{0.305, 0.03, 0.30, -0.02, 0.0};
  double prev = mechanical_energy(s, p);
  for (int block = 0; block < 80; ++block) {
    for (int k = 0; k < 50; ++k) {
      s = step(s, 0.0, 1e-3, p);
    }
    const double now = mechanical_energy(s, p);
    CHECK(now <= prev + 1e-9);
    prev = now;
  }
}

TEST_CASE("step halving shows at least fourth order convergence") {
  PhysicalParams p;
  const PlantState start{0.30, 0.025, 0.2985, 0.018, 0.0};
  const double u = 0.5;

  auto error_at = [&](double dt) {
    const PlantState coarse = step(start, u, dt, p);
    const PlantState mid = step(start, u, dt / 2.0, p);
    const PlantState fine = step(mid, u, dt / 2.0, p);
    return std::max({std::abs(coarse.bottom_pos - fine.bottom_pos),
                     std::abs(coarse.bottom_vel - fine.bottom_vel),
                     std::abs(coarse.top_pos - fine.top_pos),
                     std::abs(coarse.top_vel - fine.top_vel)});
  };

  std::vector<double> dts{8e-3, 4e-3, 2e-3, 1e-3};
  std::vector<double> errs;
  for (double dt : dts) {
    errs.push_back(error_at(dt));
  }
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double slope = std::log2(errs[i] / errs[i + 1]);
    CHECK(slope >= 4.5);
  }
}

TEST_CASE("stick phase holds the top magnet near rest") {
  PhysicalParams p;
  // Offset chosen so the coupling force is half the static friction level.
  const double target = 0.5 * p.fric_static_Fs;
  double lo = 0.0, hi = peak_restoring_offset(p);
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (lateral_magnetic_force(mid, 0.0, p) < target ? lo : hi) = mid;
  }
  PlantState s{0.3 + lo, 0.0, 0.3, 0.0, 0.0};
  double max_speed = 0.0;
  for (int k = 0; k < 3000; ++k) {
    s = step_locked_bottom(s, 0.0, 1e-3, p);
    max_speed = std::max(max_speed, std::abs(s.top_vel));
  }
  CHECK(max_speed < p.sgn_smoothing_eps);
}

TEST_CASE("track clamping zeroes the velocity of the clamped body") {
  PhysicalParams p;
  p.coupling_Kd = 0.0;
  PlantState s{0.5995, 0.2, 0.3, 0.0, 0.0};
  for (int k = 0; k < 20 && s.bottom_vel != 0.0; ++k) {
    s = step(s, 5.0, 1e-3, p);
  }
  CHECK(s.bottom_pos == kDefaultTrackLength);
  CHECK(s.bottom_vel == 0.0);
}

TEST_CASE("integration blowup raises a descriptive error") {
  PhysicalParams p;
  const PlantState s{0.3, 0.0, 0.3, 0.0, 0.0};
  CHECK_THROWS_WITH_AS(step(s, 1e308, 1e-3, p),
                       doctest::Contains("integration blew up"),
                       std::runtime_error);
  CHECK_THROWS_AS(step(s, 0.0, 0.0, p), std::invalid_argument);
}

TEST_CASE("disturbance schedule validation") {
  Disturbance d;
  d.schedule = {{0.0, -1.0, 1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  d.schedule = {{0.0, 5.0, 1.0, 0.0, 0.0}, {2.0, 5.0, 1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  d.schedule = {{0.0, 5.0, 1.0, 0.0, 3.0}};  // ramps exceed the window
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  d.schedule = {{0.0, 5.0, 1.0, 0.0, 1.0}, {6.0, 2.0, 2.0, 0.5, 0.0}};
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("disturbance envelope ramps inside the window") {
  Disturbance d;
  d.schedule = {{10.0, 6.0, 8.0, 0.5, 2.0}};
  CHECK(d.resist_force_at(9.9) == 0.0);
  CHECK(d.resist_force_at(11.0) == doctest::Approx(4.0));
  CHECK(d.resist_force_at(13.0) == doctest::Approx(8.0));
  CHECK(d.resist_force_at(15.5) == doctest::Approx(2.0));
  CHECK(d.resist_force_at(16.1) == 0.0);
  CHECK(d.extra_mass_at(10.1) == 0.5);
  CHECK(d.extra_mass_at(16.1) == 0.0);
}

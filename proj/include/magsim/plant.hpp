#pragma once

#include <utility>
#include <vector>

#include "magsim/physics.hpp"

namespace magsim {

inline constexpr double kDefaultTrackLength = 0.60;  // m
inline constexpr double kGravity = 9.81;             // m/s^2

/// Truth state of the 2-DOF plant. The state-vector ordering used everywhere
/// is (bottom_pos, bottom_vel, top_pos, top_vel).
struct PlantState {
  double bottom_pos = 0.0;  // m
  double bottom_vel = 0.0;  // m/s
  double top_pos = 0.0;     // m
  double top_vel = 0.0;     // m/s
  double time = 0.0;        // s
};

struct StateDeriv {
  double bottom_vel = 0.0;
  double bottom_acc = 0.0;
  double top_vel = 0.0;
  double top_acc = 0.0;
};

/// One scheduled patient perturbation: a resistive force opposing top-magnet
/// motion plus optional added mass, active on [start, start + duration).
/// The force builds up and releases over `ramp_s` inside the window (a grip
/// tightening and letting go); the mass change is instantaneous at the window
/// boundaries.
struct DisturbanceEvent {
  double start_s = 0.0;
  double duration_s = 0.0;
  double resist_force_n = 0.0;
  double extra_mass_kg = 0.0;
  double ramp_s = 0.0;
};

struct Disturbance {
  std::vector<DisturbanceEvent> schedule;
  // Velocity scale of the grip: the resistive force on the top magnet is
  // resist * tanh(v2 / velocity_scale), so a moving follower feels the full
  // grip while a stalled one is simply held.
  double velocity_scale = 0.05;  // m/s

  void validate() const;  // durations >= 0, entries non-overlapping
  double resist_force_at(double t) const;
  double extra_mass_at(double t) const;
  bool empty() const { return schedule.empty(); }
};

/// Net axial forces (bottom, top) in N. The magnetic term enters the two
/// bodies equal-and-opposite; the resistive disturbance acts on the top body
/// against its motion.
std::pair<double, double> net_forces(const PlantState& state, double motor_force_n,
                                     const PhysicalParams& params,
                                     const Disturbance& disturbance = {});

StateDeriv derivatives(const PlantState& state, double motor_force_n,
                       const PhysicalParams& params,
                       const Disturbance& disturbance = {});

/// Classical fixed-step 4th-order integration step. The disturbance is held
/// at its value at the step start; track clamping zeroes the velocity of a
/// body pushed past either end. Throws on a non-finite result.
PlantState step(const PlantState& state, double motor_force_n, double dt,
                const PhysicalParams& params, const Disturbance& disturbance = {},
                double track_length = kDefaultTrackLength);

/// Variant with the bottom body held in place (static characterization).
/// `lateral_pull_n` drags the top magnet along the negative travel axis.
PlantState step_locked_bottom(const PlantState& state, double lateral_pull_n,
                              double dt, const PhysicalParams& params,
                              double track_length = kDefaultTrackLength);

}  // namespace magsim

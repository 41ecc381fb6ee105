#include "magsim/plant.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace magsim {

void Disturbance::validate() const {
  if (!(velocity_scale > 0.0)) {
    throw std::invalid_argument("disturbance velocity scale must be positive");
  }
  for (const auto& event : schedule) {
    if (event.duration_s < 0.0) {
      throw std::invalid_argument("disturbance duration must be non-negative");
    }
    if (event.extra_mass_kg < 0.0) {
      throw std::invalid_argument("disturbance extra mass must be non-negative");
    }
    if (event.ramp_s < 0.0 || 2.0 * event.ramp_s > event.duration_s) {
      throw std::invalid_argument(
          "disturbance ramp must fit inside the event window");
    }
  }
  std::vector<DisturbanceEvent> sorted = schedule;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].start_s < sorted[i - 1].start_s + sorted[i - 1].duration_s) {
      throw std::invalid_argument("disturbance schedule entries overlap");
    }
  }
}

double Disturbance::resist_force_at(double t) const {
  for (const auto& event : schedule) {
    if (t >= event.start_s && t < event.start_s + event.duration_s) {
      if (event.ramp_s <= 0.0) {
        return event.resist_force_n;
      }
      const double rise = (t - event.start_s) / event.ramp_s;
      const double fall = (event.start_s + event.duration_s - t) / event.ramp_s;
      return event.resist_force_n * std::min({1.0, rise, fall});
    }
  }
  return 0.0;
}

double Disturbance::extra_mass_at(double t) const {
  for (const auto& event : schedule) {
    if (t >= event.start_s && t < event.start_s + event.duration_s) {
      return event.extra_mass_kg;
    }
  }
  return 0.0;
}

namespace {

struct Forces {
  double bottom;
  double top;
};

Forces eval_forces(double bottom_pos, double bottom_vel, double top_pos,
                   double top_vel, double motor_force_n,
                   const PhysicalParams& p, double resist_force_n,
                   double resist_vel_scale) {
  const double magnetic = lateral_magnetic_force(bottom_pos, top_pos, p);
  const double fric_bottom = viscous_friction(bottom_vel, p);
  const double fric_top = stribeck_friction(top_vel, p);
  const double resist = resist_force_n * smooth_sign(top_vel, resist_vel_scale);
  return {motor_force_n - magnetic - fric_bottom,
          magnetic - fric_top - resist};
}

void clamp_to_track(double& pos, double& vel, double track_length) {
  if (pos < 0.0) {
    pos = 0.0;
    vel = 0.0;
  } else if (pos > track_length) {
    pos = track_length;
    vel = 0.0;
  }
}

[[noreturn]] void throw_blown_up(const PlantState& s, double motor_force_n) {
  throw std::runtime_error(fmt::format(
      "integration blew up at t={:.6g}: state=({:.6g}, {:.6g}, {:.6g}, {:.6g}), u={:.6g}",
      s.time, s.bottom_pos, s.bottom_vel, s.top_pos, s.top_vel, motor_force_n));
}

bool all_finite(const PlantState& s) {
  return std::isfinite(s.bottom_pos) && std::isfinite(s.bottom_vel) &&
         std::isfinite(s.top_pos) && std::isfinite(s.top_vel);
}

}  // namespace

std::pair<double, double> net_forces(const PlantState& state, double motor_force_n,
                                     const PhysicalParams& params,
                                     const Disturbance& disturbance) {
  const Forces f = eval_forces(state.bottom_pos, state.bottom_vel, state.top_pos,
                               state.top_vel, motor_force_n, params,
                               disturbance.resist_force_at(state.time),
                               disturbance.velocity_scale);
  return {f.bottom, f.top};
}

StateDeriv derivatives(const PlantState& state, double motor_force_n,
                       const PhysicalParams& params,
                       const Disturbance& disturbance) {
  const auto [f1, f2] = net_forces(state, motor_force_n, params, disturbance);
  const double top_mass =
      params.mass_top_m2 + disturbance.extra_mass_at(state.time);
  return {state.bottom_vel, f1 / params.mass_bottom_m1, state.top_vel,
          f2 / top_mass};
}

PlantState step(const PlantState& state, double motor_force_n, double dt,
                const PhysicalParams& params, const Disturbance& disturbance,
                double track_length) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("step: dt must be positive");
  }
  // Zero-order hold of the disturbance over the step.
  const double resist = disturbance.resist_force_at(state.time);
  const double top_mass =
      params.mass_top_m2 + disturbance.extra_mass_at(state.time);

  using Y = std::array<double, 4>;
  auto deriv = [&](const Y& y) -> Y {
    const Forces f = eval_forces(y[0], y[1], y[2], y[3], motor_force_n, params,
                                 resist, disturbance.velocity_scale);
    return {y[1], f.bottom / params.mass_bottom_m1, y[3], f.top / top_mass};
  };

  const Y y0{state.bottom_pos, state.bottom_vel, state.top_pos, state.top_vel};
  const Y k1 = deriv(y0);
  Y y1;
  for (int i = 0; i < 4; ++i) y1[i] = y0[i] + 0.5 * dt * k1[i];
  const Y k2 = deriv(y1);
  Y y2;
  for (int i = 0; i < 4; ++i) y2[i] = y0[i] + 0.5 * dt * k2[i];
  const Y k3 = deriv(y2);
  Y y3;
  for (int i = 0; i < 4; ++i) y3[i] = y0[i] + dt * k3[i];
  const Y k4 = deriv(y3);

  PlantState next;
  next.bottom_pos =
      y0[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
  next.bottom_vel =
      y0[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
  next.top_pos = y0[2] + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
  next.top_vel = y0[3] + dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]);
  next.time = state.time + dt;

  if (!all_finite(next)) {
    throw_blown_up(next, motor_force_n);
  }
  clamp_to_track(next.bottom_pos, next.bottom_vel, track_length);
  clamp_to_track(next.top_pos, next.top_vel, track_length);
  return next;
}

PlantState step_locked_bottom(const PlantState& state, double lateral_pull_n,
                              double dt, const PhysicalParams& params,
                              double track_length) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("step_locked_bottom: dt must be positive");
  }
  using Y = std::array<double, 2>;  // (top_pos, top_vel)
  auto deriv = [&](const Y& y) -> Y {
    const double magnetic = lateral_magnetic_force(state.bottom_pos, y[0], params);
    const double fric = stribeck_friction(y[1], params);
    return {y[1], (magnetic - fric - lateral_pull_n) / params.mass_top_m2};
  };

  const Y y0{state.top_pos, state.top_vel};
  const Y k1 = deriv(y0);
  const Y k2 = deriv({y0[0] + 0.5 * dt * k1[0], y0[1] + 0.5 * dt * k1[1]});
  const Y k3 = deriv({y0[0] + 0.5 * dt * k2[0], y0[1] + 0.5 * dt * k2[1]});
  const Y k4 = deriv({y0[0] + dt * k3[0], y0[1] + dt * k3[1]});

  PlantState next = state;
  next.top_pos = y0[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
  next.top_vel = y0[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
  next.time = state.time + dt;

  if (!all_finite(next)) {
    throw_blown_up(next, 0.0);
  }
  clamp_to_track(next.top_pos, next.top_vel, track_length);
  return next;
}

}  // namespace magsim

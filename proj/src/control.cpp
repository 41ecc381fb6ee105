#include "magsim/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace magsim {

double rpm_to_speed(double rpm) {
  return kBeltMetersPerSecPerRpm * rpm;
}

void TrajectoryProfile::validate(double track_length) const {
  if (!(span > 0.0) || start_pos < 0.0 || start_pos + span > track_length) {
    throw std::invalid_argument("profile span must lie within the track");
  }
  if (speeds_rpm.empty()) {
    throw std::invalid_argument("profile needs at least one speed");
  }
  for (double rpm : speeds_rpm) {
    if (!(rpm > 0.0)) {
      throw std::invalid_argument("profile speeds must be positive");
    }
    if (span / rpm_to_speed(rpm) <= ramp_time_s) {
      throw std::invalid_argument("profile span too short for the ramp time");
    }
  }
  if (dwell_s < 0.0 || ramp_time_s <= 0.0 || passes_per_speed < 1) {
    throw std::invalid_argument("bad profile timing");
  }
}

double TrajectoryProfile::total_duration() const {
  double total = 0.0;
  for (double rpm : speeds_rpm) {
    const double v = rpm_to_speed(rpm);
    total += passes_per_speed * (span / v + ramp_time_s + dwell_s);
  }
  return total;
}

double TrajectoryProfile::path_length() const {
  return static_cast<double>(speeds_rpm.size()) * passes_per_speed * span;
}

namespace {

// Position/velocity along one trapezoidal move of length `span` at cruise
// speed `v`, a time `tau` after the move started. Move time is span/v + ramp.
MotionCommand trapezoid(double tau, double span, double v, double ramp) {
  const double move_time = span / v + ramp;
  const double cruise_end = move_time - ramp;
  if (tau <= 0.0) {
    return {0.0, 0.0};
  }
  if (tau < ramp) {
    const double vel = v * tau / ramp;
    return {0.5 * vel * tau, vel};
  }
  if (tau < cruise_end) {
    return {0.5 * v * ramp + v * (tau - ramp), v};
  }
  if (tau < move_time) {
    const double remaining = move_time - tau;
    const double vel = v * remaining / ramp;
    return {span - 0.5 * vel * remaining, vel};
  }
  return {span, 0.0};
}

}  // namespace

MotionCommand commanded_motion(const TrajectoryProfile& profile, double t) {
  double remaining = std::max(t, 0.0);
  // Direction flips every pass; with an even pass count each block starts at
  // the profile start position.
  int direction = 1;
  double anchor = profile.start_pos;

  for (double rpm : profile.speeds_rpm) {
    const double v = rpm_to_speed(rpm);
    const double pass_duration = profile.span / v + profile.ramp_time_s;
    const double cycle = pass_duration + profile.dwell_s;
    const double block_duration = profile.passes_per_speed * cycle;

    if (remaining < block_duration) {
      const int pass_index = static_cast<int>(remaining / cycle);
      const double tau = remaining - pass_index * cycle;
      for (int i = 0; i < pass_index; ++i) {
        anchor += direction * profile.span;
        direction = -direction;
      }
      const MotionCommand local =
          trapezoid(std::min(tau, pass_duration), profile.span, v,
                    profile.ramp_time_s);
      return {anchor + direction * local.position, direction * local.velocity};
    }
    remaining -= block_duration;
    if (profile.passes_per_speed % 2 != 0) {
      anchor += direction * profile.span;
      direction = -direction;
    }
  }
  return {anchor, 0.0};
}

double motor_force(double target_velocity, const PlantState& state, double gain,
                   double max_force_n) {
  const double u = gain * (target_velocity - state.bottom_vel);
  return std::clamp(u, -max_force_n, max_force_n);
}

void RecoveryConfig::validate() const {
  if (!(offset_threshold > 0.0)) {
    throw std::invalid_argument("recovery threshold must be positive");
  }
  if (!(proportional_gain > 0.0)) {
    throw std::invalid_argument("recovery gain must be positive");
  }
  if (!(max_recovery_speed > 0.0)) {
    throw std::invalid_argument("recovery speed cap must be positive");
  }
}

double offset_recovery(double offset, double commanded_velocity,
                       const RecoveryConfig& config) {
  const double excess = std::abs(offset) - config.offset_threshold;
  if (excess <= 0.0) {
    return commanded_velocity;
  }
  const double correction =
      std::min(config.proportional_gain * excess, config.max_recovery_speed);
  // Steer the bottom magnet toward the top one: against travel when the top
  // lags, along travel when it leads.
  return commanded_velocity - std::copysign(correction, offset);
}

Attachment detachment_check(double offset, double peak_offset) {
  const double mag = std::abs(offset);
  if (mag < 0.8 * peak_offset) {
    return Attachment::kAttached;
  }
  if (mag <= peak_offset) {
    return Attachment::kSeparating;
  }
  return Attachment::kDetached;
}

Attachment detachment_check(double offset, const PhysicalParams& params) {
  return detachment_check(offset, peak_restoring_offset(params));
}

const char* to_string(Attachment state) {
  switch (state) {
    case Attachment::kAttached:
      return "attached";
    case Attachment::kSeparating:
      return "separating";
    case Attachment::kDetached:
      return "detached";
  }
  return "unknown";
}

}  // namespace magsim

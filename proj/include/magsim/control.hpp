#pragma once

#include <vector>

#include "magsim/physics.hpp"
#include "magsim/plant.hpp"

namespace magsim {

/// Belt transmission ratio, m/s per RPM, fitted to the published speed pairs.
inline constexpr double kBeltMetersPerSecPerRpm = 1.467e-3;

double rpm_to_speed(double rpm);

/// Back-and-forth trapezoidal reference: for each listed speed, a number of
/// passes across [start_pos, start_pos + span] with a dwell after every pass.
/// The reference holds its final endpoint once all passes are done.
struct TrajectoryProfile {
  double start_pos = 0.15;  // m
  double span = 0.30;       // m
  std::vector<double> speeds_rpm{15.0, 25.0};
  double dwell_s = 1.0;
  int passes_per_speed = 10;
  double ramp_time_s = 0.15;

  void validate(double track_length = kDefaultTrackLength) const;
  double total_duration() const;
  /// Commanded path length: one span per pass.
  double path_length() const;
};

struct MotionCommand {
  double position;  // m
  double velocity;  // m/s
};

MotionCommand commanded_motion(const TrajectoryProfile& profile, double t);

/// Inner velocity loop: u = clamp(gain * (v_target - v_bottom), +-max_force).
double motor_force(double target_velocity, const PlantState& state, double gain,
                   double max_force_n);

struct RecoveryConfig {
  double offset_threshold = 1.5e-3;  // m
  double proportional_gain = 40.0;   // (m/s)/m
  double max_recovery_speed = 0.05;  // m/s, cap on the corrective term

  void validate() const;
};

/// Proportional offset recovery acting on the commanded velocity. Identity
/// inside the threshold band; outside it, a correction proportional to the
/// excess offset (capped) steers the bottom magnet back toward the top one.
double offset_recovery(double offset, double commanded_velocity,
                       const RecoveryConfig& config);

enum class Attachment { kAttached, kSeparating, kDetached };

/// Classification of an offset against the peak of the restoring-force curve:
/// below 0.8x the peak offset the coupling is attached, within [0.8, 1.0]x it
/// is separating, beyond the peak it cannot recover passively.
Attachment detachment_check(double offset, double peak_offset);
Attachment detachment_check(double offset, const PhysicalParams& params);

const char* to_string(Attachment state);

}  // namespace magsim

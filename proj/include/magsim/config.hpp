#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magsim/control.hpp"
#include "magsim/estimator.hpp"
#include "magsim/plant.hpp"
#include "magsim/sensing.hpp"

namespace magsim {

enum class ScenarioKind { kStatic, kDynamic, kHuman, kRecovery, kTune, kCalibrate };
enum class RunMode { kFull, kPartial, kBoth };

const char* to_string(ScenarioKind kind);
const char* to_string(RunMode mode);

// The motor command is held over a control step, so the velocity loop is
// discretely sampled: gain * dt / m1 must stay below 2 for the loop to damp.
struct ControlOptions {
  double velocity_gain = 600.0;  // N per m/s of velocity error
  double max_force_n = 20.0;
};

struct RecoveryOptions {
  bool enabled = false;
  // Negative threshold means "derive as half the peak restoring offset".
  double offset_threshold = -1.0;
  double gain = 80.0;
  double max_speed = 0.05;
};

/// Scalar noise settings expanded into the estimator's NoiseConfig. Process
/// noise is split between position rows (kinematic identities, near zero) and
/// velocity rows (unmodeled forces). A full initial covariance (e.g. the
/// converged matrix from tuning) overrides the scalar p0 when present.
struct NoiseOptions {
  double q_pos = 1e-12;
  double q_vel = 1e-3;
  double r_encoder = 1e-8;
  double r_laser = 1e-6;
  double p0 = 1e-6;
  std::optional<Eigen::Matrix4d> p0_matrix;

  NoiseConfig materialize(const Eigen::Vector4d& x0) const;
};

struct TrialConfig {
  ScenarioKind kind = ScenarioKind::kHuman;
  PhysicalParams physics;
  SensorParams sensors;
  NoiseOptions noise;
  TrajectoryProfile profile;
  ControlOptions control;
  RecoveryOptions recovery;
  Disturbance disturbance;
  double dt = 1e-3;
  double track_length = kDefaultTrackLength;
  bool interrupters_enabled = true;
  std::vector<double> weights;     // kg, scenario-dependent sweep
  std::vector<double> speeds_rpm;  // dynamic-trial sweep
  double duration_s = -1.0;        // negative: scenario default
  std::uint64_t seed = 1;
  RunMode mode = RunMode::kBoth;
  std::string out_dir = "out";
  double calibrate_target_kg = 1.45;

  void validate() const;
};

/// Baseline configuration for a scenario, including its default weight and
/// speed sweeps, profile and disturbance schedule.
TrialConfig default_config(ScenarioKind kind);

/// Parses the flat key-value config format (dotted section keys, '#'
/// comments). Unknown keys and malformed lines are rejected with the line
/// number and key named. When `forced_kind` is set (the CLI subcommand), a
/// scenario key in the file must agree with it.
TrialConfig load_config(const std::string& path,
                        std::optional<ScenarioKind> forced_kind = std::nullopt);

/// Writes the physics section in config format (used by `calibrate`).
void write_physics_config(const PhysicalParams& params, const std::string& path);

/// Writes the noise section in config format (used by `tune`).
void write_noise_config(const NoiseConfig& noise, const std::string& path);

}  // namespace magsim

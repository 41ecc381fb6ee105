#pragma once

#include <optional>
#include <string>
#include <vector>

#include "magsim/config.hpp"
#include "magsim/csv_log.hpp"
#include "magsim/estimator.hpp"

namespace magsim {

struct StaticWeightResult {
  double weight_kg = 0.0;
  double final_offset_m = 0.0;
  Attachment state = Attachment::kAttached;
};

struct StaticReport {
  std::vector<StaticWeightResult> rows;
  std::optional<double> detach_weight_kg;  // first detaching weight
  double peak_offset_m = 0.0;              // detachment boundary of the force curve
};

/// Locks the bottom magnet, pulls the top one with each calibration weight in
/// turn, and records the settled offset or the detachment. Throws if a weight
/// fails to settle within the internal timeout.
StaticReport run_static_trial(const TrialConfig& config);

struct DynamicCell {
  double speed_rpm = 0.0;
  double weight_kg = 0.0;
  double peak_offset_m = 0.0;
  bool detached = false;
};

struct DynamicReport {
  std::vector<DynamicCell> cells;  // speed-major, weight-minor, config order
  int max_cell_index = -1;         // cell with the largest peak offset
};

/// Full-track round trip per (speed, weight) cell with the weight riding on
/// the top magnet; records the offset trace of every cell.
DynamicReport run_dynamic_trial(const TrialConfig& config);

struct ModeEstimates {
  double rmse_bottom_cm = 0.0;
  double rmse_top_cm = 0.0;
  double max_error_m = 0.0;         // worst state-estimate component error
  double max_symmetry_defect = 0.0;
  double min_eigenvalue = 0.0;
};

struct HumanReport {
  std::optional<ModeEstimates> full;
  std::optional<ModeEstimates> partial;
  double path_length_m = 0.0;   // distance actually travelled by the bottom magnet
  double max_offset_m = 0.0;
  int interrupter_events = 0;
};

/// The back-and-forth estimation trial: one truth + measurement stream, the
/// requested filter modes replayed against it, RMSE per magnet per mode.
HumanReport run_human_trial(const TrialConfig& config);

struct RecoveryRunResult {
  bool detached = false;           // any step classified detached
  Attachment final_state = Attachment::kAttached;
  double max_offset_m = 0.0;
  int recovery_steps = 0;
  double reattach_time_s = -1.0;   // time after pulse end until the offset
                                   // returns under the threshold; -1 if never
};

struct RecoveryReport {
  RecoveryRunResult with_recovery;
  RecoveryRunResult without_recovery;
  double threshold_m = 0.0;
  double pulse_end_s = 0.0;
};

/// Runs the perturbation scenario twice, with the recovery law enabled and
/// disabled, on the same configuration.
RecoveryReport run_recovery_demo(const TrialConfig& config);

struct TuneReport {
  TuneResult result;
  std::string noise_path;  // tuned settings, config format
};

/// Simulates a logged reference trial and grid-searches Q/R against it.
TuneReport run_tune(const TrialConfig& config);

struct CalibrationReport {
  double coupling_Kd = 0.0;
  double peak_force_n = 0.0;
  double peak_offset_m = 0.0;
  double predicted_detach_kg = 0.0;
  std::string params_path;  // calibrated physics, config format
};

/// One-dimensional search on coupling_Kd so the peak restoring force matches
/// the configured detachment weight; writes the calibrated parameter file.
CalibrationReport run_calibrate(const TrialConfig& config);

/// Materialized recovery law for a configuration (resolves the automatic
/// threshold from the calibrated force curve).
RecoveryConfig materialize_recovery(const TrialConfig& config);

std::string summary_path(const TrialConfig& config);

}  // namespace magsim

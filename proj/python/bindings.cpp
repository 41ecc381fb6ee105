#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "magsim/config.hpp"
#include "magsim/harness.hpp"

namespace py = pybind11;
using namespace magsim;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coupled-magnet actuator simulation and state estimation";

  // physics ------------------------------------------------------------
  py::class_<PhysicalParams>(m, "PhysicalParams")
      .def(py::init<>())
      .def_readwrite("mu0", &PhysicalParams::mu0)
      .def_readwrite("magnetization_M", &PhysicalParams::magnetization_M)
      .def_readwrite("coupling_Kd", &PhysicalParams::coupling_Kd)
      .def_readwrite("radius_R", &PhysicalParams::radius_R)
      .def_readwrite("height_h", &PhysicalParams::height_h)
      .def_readwrite("separation_d", &PhysicalParams::separation_d)
      .def_readwrite("mass_bottom_m1", &PhysicalParams::mass_bottom_m1)
      .def_readwrite("mass_top_m2", &PhysicalParams::mass_top_m2)
      .def_readwrite("fric_coulomb_Fc", &PhysicalParams::fric_coulomb_Fc)
      .def_readwrite("fric_static_Fs", &PhysicalParams::fric_static_Fs)
      .def_readwrite("stribeck_vel_vs", &PhysicalParams::stribeck_vel_vs)
      .def_readwrite("fric_viscous_Kv_top", &PhysicalParams::fric_viscous_Kv_top)
      .def_readwrite("fric_viscous_Kv_bottom",
                     &PhysicalParams::fric_viscous_Kv_bottom)
      .def_readwrite("sgn_smoothing_eps", &PhysicalParams::sgn_smoothing_eps)
      .def("validate", &PhysicalParams::validate);

  m.def("geometric_factor", &geometric_factor, py::arg("gap"), py::arg("height"));
  m.def("smooth_sign", &smooth_sign, py::arg("velocity"), py::arg("eps"));
  m.def("lateral_magnetic_force", &lateral_magnetic_force, py::arg("bottom_pos"),
        py::arg("top_pos"), py::arg("params"));
  m.def("stribeck_friction", &stribeck_friction, py::arg("velocity"),
        py::arg("params"));
  m.def("viscous_friction", &viscous_friction, py::arg("velocity"),
        py::arg("params"));
  m.def("peak_restoring_offset", &peak_restoring_offset, py::arg("params"));
  m.def("coupling_extent", &coupling_extent, py::arg("params"));

  // plant ----------------------------------------------------------------
  py::class_<PlantState>(m, "PlantState")
      .def(py::init<>())
      .def(py::init([](double x1, double v1, double x2, double v2, double t) {
             return PlantState{x1, v1, x2, v2, t};
           }),
           py::arg("bottom_pos"), py::arg("bottom_vel"), py::arg("top_pos"),
           py::arg("top_vel"), py::arg("time") = 0.0)
      .def_readwrite("bottom_pos", &PlantState::bottom_pos)
      .def_readwrite("bottom_vel", &PlantState::bottom_vel)
      .def_readwrite("top_pos", &PlantState::top_pos)
      .def_readwrite("top_vel", &PlantState::top_vel)
      .def_readwrite("time", &PlantState::time);

  py::class_<StateDeriv>(m, "StateDeriv")
      .def_readonly("bottom_vel", &StateDeriv::bottom_vel)
      .def_readonly("bottom_acc", &StateDeriv::bottom_acc)
      .def_readonly("top_vel", &StateDeriv::top_vel)
      .def_readonly("top_acc", &StateDeriv::top_acc);

  py::class_<DisturbanceEvent>(m, "DisturbanceEvent")
      .def(py::init<>())
      .def(py::init([](double start, double duration, double force, double mass,
                       double ramp) {
             return DisturbanceEvent{start, duration, force, mass, ramp};
           }),
           py::arg("start_s"), py::arg("duration_s"), py::arg("resist_force_n"),
           py::arg("extra_mass_kg") = 0.0, py::arg("ramp_s") = 0.0)
      .def_readwrite("start_s", &DisturbanceEvent::start_s)
      .def_readwrite("duration_s", &DisturbanceEvent::duration_s)
      .def_readwrite("resist_force_n", &DisturbanceEvent::resist_force_n)
      .def_readwrite("extra_mass_kg", &DisturbanceEvent::extra_mass_kg)
      .def_readwrite("ramp_s", &DisturbanceEvent::ramp_s);

  py::class_<Disturbance>(m, "Disturbance")
      .def(py::init<>())
      .def_readwrite("schedule", &Disturbance::schedule)
      .def_readwrite("velocity_scale", &Disturbance::velocity_scale)
      .def("validate", &Disturbance::validate)
      .def("resist_force_at", &Disturbance::resist_force_at)
      .def("extra_mass_at", &Disturbance::extra_mass_at);

  m.def("net_forces", &net_forces, py::arg("state"), py::arg("motor_force_n"),
        py::arg("params"), py::arg("disturbance") = Disturbance{});
  m.def("derivatives", &derivatives, py::arg("state"), py::arg("motor_force_n"),
        py::arg("params"), py::arg("disturbance") = Disturbance{});
  m.def("step", &step, py::arg("state"), py::arg("motor_force_n"), py::arg("dt"),
        py::arg("params"), py::arg("disturbance") = Disturbance{},
        py::arg("track_length") = kDefaultTrackLength);
  m.def("step_locked_bottom", &step_locked_bottom, py::arg("state"),
        py::arg("lateral_pull_n"), py::arg("dt"), py::arg("params"),
        py::arg("track_length") = kDefaultTrackLength);

  // sensing ----------------------------------------------------------------
  py::enum_<MeasureMode>(m, "MeasureMode")
      .value("FULL", MeasureMode::kFull)
      .value("PARTIAL", MeasureMode::kPartial);

  py::class_<Measurement>(m, "Measurement")
      .def(py::init<>())
      .def_readwrite("z", &Measurement::z)
      .def_readwrite("mode", &Measurement::mode)
      .def_readwrite("t", &Measurement::t);

  py::class_<SensorParams>(m, "SensorParams")
      .def(py::init<>())
      .def_readwrite("encoder_resolution", &SensorParams::encoder_resolution)
      .def_readwrite("laser_noise_sigma", &SensorParams::laser_noise_sigma)
      .def_readwrite("laser_bias", &SensorParams::laser_bias)
      .def_readwrite("interrupter_positions", &SensorParams::interrupter_positions)
      .def_readwrite("interrupter_impulse", &SensorParams::interrupter_impulse)
      .def_readwrite("rng_seed", &SensorParams::rng_seed)
      .def("validate", &SensorParams::validate,
           py::arg("track_length") = kDefaultTrackLength);

  py::class_<SensorSuite>(m, "SensorSuite")
      .def(py::init<const SensorParams&>())
      .def("encoder_read", &SensorSuite::encoder_read)
      .def("laser_read", &SensorSuite::laser_read)
      .def("measure", &SensorSuite::measure);

  // estimator ----------------------------------------------------------------
  py::class_<NoiseConfig>(m, "NoiseConfig")
      .def(py::init<>())
      .def_readwrite("Q", &NoiseConfig::Q)
      .def_readwrite("r_encoder", &NoiseConfig::r_encoder)
      .def_readwrite("r_laser", &NoiseConfig::r_laser)
      .def_readwrite("P0", &NoiseConfig::P0)
      .def_readwrite("x0", &NoiseConfig::x0)
      .def("validate", &NoiseConfig::validate)
      .def("measurement_covariance", &NoiseConfig::measurement_covariance);

  py::class_<Ekf>(m, "Ekf")
      .def(py::init<const PhysicalParams&, const NoiseConfig&, MeasureMode,
                    double>(),
           py::arg("params"), py::arg("noise"), py::arg("mode"),
           py::arg("track_length") = kDefaultTrackLength)
      .def("predict", &Ekf::predict, py::arg("motor_force_n"), py::arg("dt"))
      .def("update", &Ekf::update, py::arg("measurement"))
      .def_property_readonly("state", &Ekf::state)
      .def_property_readonly("covariance", &Ekf::covariance)
      .def_property_readonly("time", &Ekf::time)
      .def_property_readonly("max_symmetry_defect", &Ekf::max_symmetry_defect)
      .def_property_readonly("min_eigenvalue_seen", &Ekf::min_eigenvalue_seen);

  m.def("measurement_jacobian", &measurement_jacobian, py::arg("mode"));
  m.def("transition_jacobian", &transition_jacobian, py::arg("x"),
        py::arg("motor_force_n"), py::arg("dt"), py::arg("params"),
        py::arg("track_length") = kDefaultTrackLength);
  m.def("predict_covariance", &predict_covariance, py::arg("P"), py::arg("F"),
        py::arg("Q"));
  m.def("kalman_gain", &kalman_gain, py::arg("P"), py::arg("H"), py::arg("R"));

  py::class_<ObservabilityReport>(m, "ObservabilityReport")
      .def_readonly("rank", &ObservabilityReport::rank)
      .def_readonly("min_singular_value", &ObservabilityReport::min_singular_value)
      .def_readonly("condition", &ObservabilityReport::condition);
  m.def("observability_rank", &observability_rank, py::arg("x_lin"),
        py::arg("motor_force_n"), py::arg("dt"), py::arg("params"),
        py::arg("mode"), py::arg("track_length") = kDefaultTrackLength);

  m.def(
      "rmse",
      [](const std::vector<double>& estimates, const std::vector<double>& truth) {
        return rmse(estimates, truth);
      },
      py::arg("estimates"), py::arg("truth"));

  // control ----------------------------------------------------------------
  m.def("rpm_to_speed", &rpm_to_speed, py::arg("rpm"));

  py::class_<TrajectoryProfile>(m, "TrajectoryProfile")
      .def(py::init<>())
      .def_readwrite("start_pos", &TrajectoryProfile::start_pos)
      .def_readwrite("span", &TrajectoryProfile::span)
      .def_readwrite("speeds_rpm", &TrajectoryProfile::speeds_rpm)
      .def_readwrite("dwell_s", &TrajectoryProfile::dwell_s)
      .def_readwrite("passes_per_speed", &TrajectoryProfile::passes_per_speed)
      .def_readwrite("ramp_time_s", &TrajectoryProfile::ramp_time_s)
      .def("total_duration", &TrajectoryProfile::total_duration)
      .def("path_length", &TrajectoryProfile::path_length);

  py::class_<MotionCommand>(m, "MotionCommand")
      .def_readonly("position", &MotionCommand::position)
      .def_readonly("velocity", &MotionCommand::velocity);
  m.def("commanded_motion", &commanded_motion, py::arg("profile"), py::arg("t"));

  m.def("motor_force", &motor_force, py::arg("target_velocity"), py::arg("state"),
        py::arg("gain"), py::arg("max_force_n"));

  py::class_<RecoveryConfig>(m, "RecoveryConfig")
      .def(py::init<>())
      .def_readwrite("offset_threshold", &RecoveryConfig::offset_threshold)
      .def_readwrite("proportional_gain", &RecoveryConfig::proportional_gain)
      .def_readwrite("max_recovery_speed", &RecoveryConfig::max_recovery_speed);
  m.def("offset_recovery", &offset_recovery, py::arg("offset"),
        py::arg("commanded_velocity"), py::arg("config"));

  py::enum_<Attachment>(m, "Attachment")
      .value("ATTACHED", Attachment::kAttached)
      .value("SEPARATING", Attachment::kSeparating)
      .value("DETACHED", Attachment::kDetached);
  m.def("detachment_check",
        py::overload_cast<double, double>(&detachment_check), py::arg("offset"),
        py::arg("peak_offset"));
  m.def("detachment_check",
        py::overload_cast<double, const PhysicalParams&>(&detachment_check),
        py::arg("offset"), py::arg("params"));

  // harness ----------------------------------------------------------------
  py::enum_<ScenarioKind>(m, "ScenarioKind")
      .value("STATIC", ScenarioKind::kStatic)
      .value("DYNAMIC", ScenarioKind::kDynamic)
      .value("HUMAN", ScenarioKind::kHuman)
      .value("RECOVERY", ScenarioKind::kRecovery)
      .value("TUNE", ScenarioKind::kTune)
      .value("CALIBRATE", ScenarioKind::kCalibrate);

  py::enum_<RunMode>(m, "RunMode")
      .value("FULL", RunMode::kFull)
      .value("PARTIAL", RunMode::kPartial)
      .value("BOTH", RunMode::kBoth);

  py::class_<NoiseOptions>(m, "NoiseOptions")
      .def(py::init<>())
      .def_readwrite("q_pos", &NoiseOptions::q_pos)
      .def_readwrite("q_vel", &NoiseOptions::q_vel)
      .def_readwrite("r_encoder", &NoiseOptions::r_encoder)
      .def_readwrite("r_laser", &NoiseOptions::r_laser)
      .def_readwrite("p0", &NoiseOptions::p0);

  py::class_<TrialConfig>(m, "TrialConfig")
      .def(py::init<>())
      .def_readwrite("kind", &TrialConfig::kind)
      .def_readwrite("physics", &TrialConfig::physics)
      .def_readwrite("sensors", &TrialConfig::sensors)
      .def_readwrite("noise", &TrialConfig::noise)
      .def_readwrite("profile", &TrialConfig::profile)
      .def_readwrite("recovery", &TrialConfig::recovery)
      .def_readwrite("disturbance", &TrialConfig::disturbance)
      .def_readwrite("dt", &TrialConfig::dt)
      .def_readwrite("track_length", &TrialConfig::track_length)
      .def_readwrite("interrupters_enabled", &TrialConfig::interrupters_enabled)
      .def_readwrite("weights", &TrialConfig::weights)
      .def_readwrite("speeds_rpm", &TrialConfig::speeds_rpm)
      .def_readwrite("duration_s", &TrialConfig::duration_s)
      .def_readwrite("seed", &TrialConfig::seed)
      .def_readwrite("mode", &TrialConfig::mode)
      .def_readwrite("out_dir", &TrialConfig::out_dir)
      .def("validate", &TrialConfig::validate);

  py::class_<RecoveryOptions>(m, "RecoveryOptions")
      .def(py::init<>())
      .def_readwrite("enabled", &RecoveryOptions::enabled)
      .def_readwrite("offset_threshold", &RecoveryOptions::offset_threshold)
      .def_readwrite("gain", &RecoveryOptions::gain)
      .def_readwrite("max_speed", &RecoveryOptions::max_speed);

  m.def("default_config", &default_config, py::arg("kind"));
  m.def(
      "load_config",
      [](const std::string& path) { return load_config(path); },
      py::arg("path"));

  py::class_<StaticWeightResult>(m, "StaticWeightResult")
      .def_readonly("weight_kg", &StaticWeightResult::weight_kg)
      .def_readonly("final_offset_m", &StaticWeightResult::final_offset_m)
      .def_readonly("state", &StaticWeightResult::state);
  py::class_<StaticReport>(m, "StaticReport")
      .def_readonly("rows", &StaticReport::rows)
      .def_readonly("detach_weight_kg", &StaticReport::detach_weight_kg)
      .def_readonly("peak_offset_m", &StaticReport::peak_offset_m);
  m.def("run_static_trial", &run_static_trial, py::arg("config"));

  py::class_<DynamicCell>(m, "DynamicCell")
      .def_readonly("speed_rpm", &DynamicCell::speed_rpm)
      .def_readonly("weight_kg", &DynamicCell::weight_kg)
      .def_readonly("peak_offset_m", &DynamicCell::peak_offset_m)
      .def_readonly("detached", &DynamicCell::detached);
  py::class_<DynamicReport>(m, "DynamicReport")
      .def_readonly("cells", &DynamicReport::cells)
      .def_readonly("max_cell_index", &DynamicReport::max_cell_index);
  m.def("run_dynamic_trial", &run_dynamic_trial, py::arg("config"));

  py::class_<ModeEstimates>(m, "ModeEstimates")
      .def_readonly("rmse_bottom_cm", &ModeEstimates::rmse_bottom_cm)
      .def_readonly("rmse_top_cm", &ModeEstimates::rmse_top_cm)
      .def_readonly("max_error_m", &ModeEstimates::max_error_m)
      .def_readonly("max_symmetry_defect", &ModeEstimates::max_symmetry_defect)
      .def_readonly("min_eigenvalue", &ModeEstimates::min_eigenvalue);
  py::class_<HumanReport>(m, "HumanReport")
      .def_readonly("full", &HumanReport::full)
      .def_readonly("partial", &HumanReport::partial)
      .def_readonly("path_length_m", &HumanReport::path_length_m)
      .def_readonly("max_offset_m", &HumanReport::max_offset_m)
      .def_readonly("interrupter_events", &HumanReport::interrupter_events);
  m.def("run_human_trial", &run_human_trial, py::arg("config"));

  py::class_<RecoveryRunResult>(m, "RecoveryRunResult")
      .def_readonly("detached", &RecoveryRunResult::detached)
      .def_readonly("final_state", &RecoveryRunResult::final_state)
      .def_readonly("max_offset_m", &RecoveryRunResult::max_offset_m)
      .def_readonly("recovery_steps", &RecoveryRunResult::recovery_steps)
      .def_readonly("reattach_time_s", &RecoveryRunResult::reattach_time_s);
  py::class_<RecoveryReport>(m, "RecoveryReport")
      .def_readonly("with_recovery", &RecoveryReport::with_recovery)
      .def_readonly("without_recovery", &RecoveryReport::without_recovery)
      .def_readonly("threshold_m", &RecoveryReport::threshold_m)
      .def_readonly("pulse_end_s", &RecoveryReport::pulse_end_s);
  m.def("run_recovery_demo", &run_recovery_demo, py::arg("config"));

  py::class_<TuneResult>(m, "TuneResult")
      .def_readonly("config", &TuneResult::config)
      .def_readonly("q", &TuneResult::q)
      .def_readonly("r_scale", &TuneResult::r_scale)
      .def_readonly("rmse_sum_m", &TuneResult::rmse_sum_m);
  py::class_<TuneReport>(m, "TuneReport")
      .def_readonly("result", &TuneReport::result)
      .def_readonly("noise_path", &TuneReport::noise_path);
  m.def("run_tune", &run_tune, py::arg("config"));

  py::class_<CalibrationReport>(m, "CalibrationReport")
      .def_readonly("coupling_Kd", &CalibrationReport::coupling_Kd)
      .def_readonly("peak_force_n", &CalibrationReport::peak_force_n)
      .def_readonly("peak_offset_m", &CalibrationReport::peak_offset_m)
      .def_readonly("predicted_detach_kg", &CalibrationReport::predicted_detach_kg)
      .def_readonly("params_path", &CalibrationReport::params_path);
  m.def("run_calibrate", &run_calibrate, py::arg("config"));

  m.attr("DEFAULT_TRACK_LENGTH") = kDefaultTrackLength;
  m.attr("GRAVITY") = kGravity;
}

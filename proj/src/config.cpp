#include "magsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace magsim {

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kStatic: return "static";
    case ScenarioKind::kDynamic: return "dynamic";
    case ScenarioKind::kHuman: return "human";
    case ScenarioKind::kRecovery: return "recovery";
    case ScenarioKind::kTune: return "tune";
    case ScenarioKind::kCalibrate: return "calibrate";
  }
  return "unknown";
}

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kFull: return "full";
    case RunMode::kPartial: return "partial";
    case RunMode::kBoth: return "both";
  }
  return "unknown";
}

NoiseConfig NoiseOptions::materialize(const Eigen::Vector4d& x0) const {
  NoiseConfig cfg;
  cfg.Q = Eigen::Vector4d(q_pos, q_vel, q_pos, q_vel).asDiagonal();
  cfg.r_encoder = r_encoder;
  cfg.r_laser = r_laser;
  cfg.P0 = p0_matrix ? *p0_matrix : Eigen::Matrix4d(Eigen::Matrix4d::Identity() * p0);
  cfg.x0 = x0;
  cfg.validate();
  return cfg;
}

void TrialConfig::validate() const {
  physics.validate();
  sensors.validate(track_length);
  profile.validate(track_length);
  disturbance.validate();
  if (!(dt > 0.0)) {
    throw std::invalid_argument("plant.dt must be positive");
  }
  if (!(track_length > 0.0)) {
    throw std::invalid_argument("plant.track_length must be positive");
  }
  for (double w : weights) {
    if (w < 0.0) {
      throw std::invalid_argument("trial.weights must be non-negative");
    }
  }
  for (double rpm : speeds_rpm) {
    if (!(rpm > 0.0)) {
      throw std::invalid_argument("trial.speeds_rpm must be positive");
    }
  }
  if (duration_s == 0.0) {
    throw std::invalid_argument("trial.duration must be positive");
  }
  if (!(control.velocity_gain > 0.0) || !(control.max_force_n > 0.0)) {
    throw std::invalid_argument("control gains must be positive");
  }
  if (recovery.offset_threshold == 0.0) {
    throw std::invalid_argument("recovery.offset_threshold must be positive");
  }
  if (!(recovery.gain > 0.0) || !(recovery.max_speed > 0.0)) {
    throw std::invalid_argument("recovery gain and speed cap must be positive");
  }
}

TrialConfig default_config(ScenarioKind kind) {
  TrialConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case ScenarioKind::kStatic:
    case ScenarioKind::kCalibrate:
      cfg.weights = {0.0, 0.5, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7};
      break;
    case ScenarioKind::kDynamic:
      cfg.weights = {0.0, 0.2, 0.5, 1.0, 1.5};
      cfg.speeds_rpm = {10.0, 20.0, 30.0};
      // Full-track round trip, one per cell.
      cfg.profile.start_pos = 0.0;
      cfg.profile.span = kDefaultTrackLength;
      cfg.profile.passes_per_speed = 2;
      break;
    case ScenarioKind::kHuman:
    case ScenarioKind::kTune:
      // 10 passes over 0.30 m at each speed: 6 m of commanded path in about
      // four minutes. The tune scenario shortens this below.
      cfg.profile.start_pos = 0.15;
      cfg.profile.span = 0.30;
      cfg.profile.speeds_rpm = {15.0, 25.0};
      cfg.profile.passes_per_speed = 10;
      // Episodes of patient resistance gripping the armrest; the estimators
      // never see these forces.
      cfg.disturbance.schedule = {{35.0, 6.0, 20.0, 0.0, 1.5},
                                  {75.0, 5.0, 24.0, 0.0, 1.5},
                                  {170.0, 5.0, 36.0, 0.0, 1.5},
                                  {215.0, 4.0, 30.0, 0.0, 1.5}};
      if (kind == ScenarioKind::kTune) {
        cfg.profile.passes_per_speed = 2;
        cfg.disturbance.schedule = {{15.0, 4.0, 24.0, 0.0, 1.5}};
      }
      break;
    case ScenarioKind::kRecovery:
      cfg.profile.start_pos = 0.15;
      cfg.profile.span = 0.30;
      cfg.profile.speeds_rpm = {30.0};
      cfg.profile.passes_per_speed = 6;
      cfg.recovery.enabled = true;
      cfg.mode = RunMode::kFull;
      // A sudden grip strong enough that the driver, still pushing at the
      // profile speed, walks the offset past the force peak.
      cfg.disturbance.schedule = {{12.0, 4.0, 40.0, 0.0, 0.0}};
      break;
  }
  return cfg;
}

namespace {

double parse_number(const std::string& value, int line_no, const std::string& key) {
  const char* begin = value.data();
  const char* end = begin + value.size();
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error(fmt::format(
        "config parse error at line {}: key '{}' has bad number '{}'", line_no,
        key, value));
  }
  return out;
}

bool parse_bool(const std::string& value, int line_no, const std::string& key) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::runtime_error(fmt::format(
      "config parse error at line {}: key '{}' has bad boolean '{}'", line_no,
      key, value));
}

std::vector<double> parse_list(const std::string& value, int line_no,
                               const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) {
      throw std::runtime_error(fmt::format(
          "config parse error at line {}: key '{}' has an empty list item",
          line_no, key));
    }
    out.push_back(parse_number(item.substr(first, last - first + 1), line_no, key));
  }
  if (out.empty()) {
    throw std::runtime_error(fmt::format(
        "config parse error at line {}: key '{}' has an empty list", line_no, key));
  }
  return out;
}

ScenarioKind parse_scenario(const std::string& value, int line_no) {
  if (value == "static") return ScenarioKind::kStatic;
  if (value == "dynamic") return ScenarioKind::kDynamic;
  if (value == "human") return ScenarioKind::kHuman;
  if (value == "recovery") return ScenarioKind::kRecovery;
  if (value == "tune") return ScenarioKind::kTune;
  if (value == "calibrate") return ScenarioKind::kCalibrate;
  throw std::runtime_error(fmt::format(
      "config parse error at line {}: unknown scenario '{}'", line_no, value));
}

RunMode parse_mode(const std::string& value, int line_no) {
  if (value == "full") return RunMode::kFull;
  if (value == "partial") return RunMode::kPartial;
  if (value == "both") return RunMode::kBoth;
  throw std::runtime_error(fmt::format(
      "config parse error at line {}: unknown mode '{}'", line_no, value));
}

Disturbance parse_schedule(const std::string& value, int line_no) {
  Disturbance d;
  std::stringstream ss(value);
  std::string entry;
  while (std::getline(ss, entry, ';')) {
    const std::vector<double> fields =
        parse_list(entry, line_no, "disturbance.schedule");
    if (fields.size() != 4 && fields.size() != 5) {
      throw std::runtime_error(fmt::format(
          "config parse error at line {}: disturbance.schedule entries are "
          "'start,duration,force,extra_mass[,ramp]'",
          line_no));
    }
    d.schedule.push_back({fields[0], fields[1], fields[2], fields[3],
                          fields.size() == 5 ? fields[4] : 0.0});
  }
  return d;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return "";
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

TrialConfig load_config(const std::string& path,
                        std::optional<ScenarioKind> forced_kind) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }

  // First pass: find the scenario key so defaults are picked before overrides.
  std::vector<std::pair<int, std::string>> lines;
  {
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string line = trim(raw);
      if (line.empty() || line[0] == '#') {
        continue;
      }
      lines.emplace_back(line_no, line);
    }
  }

  std::optional<ScenarioKind> file_kind;
  for (const auto& [line_no, line] : lines) {
    const auto eq = line.find('=');
    if (eq != std::string::npos && trim(line.substr(0, eq)) == "scenario") {
      file_kind = parse_scenario(trim(line.substr(eq + 1)), line_no);
    }
  }
  if (forced_kind && file_kind && *file_kind != *forced_kind) {
    throw std::runtime_error(fmt::format(
        "config scenario '{}' does not match the requested '{}'",
        to_string(*file_kind), to_string(*forced_kind)));
  }
  const ScenarioKind kind =
      forced_kind ? *forced_kind : file_kind.value_or(ScenarioKind::kHuman);
  TrialConfig cfg = default_config(kind);

  using Setter = std::function<void(TrialConfig&, const std::string&, int)>;
  const std::map<std::string, Setter> setters = {
      {"scenario", [](TrialConfig&, const std::string&, int) {}},
      {"physics.mu0", [](TrialConfig& c, const std::string& v, int ln) { c.physics.mu0 = parse_number(v, ln, "physics.mu0"); }},
      {"physics.magnetization_M", [](TrialConfig& c, const std::string& v, int ln) { c.physics.magnetization_M = parse_number(v, ln, "physics.magnetization_M"); }},
      {"physics.coupling_Kd", [](TrialConfig& c, const std::string& v, int ln) { c.physics.coupling_Kd = parse_number(v, ln, "physics.coupling_Kd"); }},
      {"physics.radius_R", [](TrialConfig& c, const std::string& v, int ln) { c.physics.radius_R = parse_number(v, ln, "physics.radius_R"); }},
      {"physics.height_h", [](TrialConfig& c, const std::string& v, int ln) { c.physics.height_h = parse_number(v, ln, "physics.height_h"); }},
      {"physics.separation_d", [](TrialConfig& c, const std::string& v, int ln) { c.physics.separation_d = parse_number(v, ln, "physics.separation_d"); }},
      {"physics.mass_bottom_m1", [](TrialConfig& c, const std::string& v, int ln) { c.physics.mass_bottom_m1 = parse_number(v, ln, "physics.mass_bottom_m1"); }},
      {"physics.mass_top_m2", [](TrialConfig& c, const std::string& v, int ln) { c.physics.mass_top_m2 = parse_number(v, ln, "physics.mass_top_m2"); }},
      {"physics.fric_coulomb_Fc", [](TrialConfig& c, const std::string& v, int ln) { c.physics.fric_coulomb_Fc = parse_number(v, ln, "physics.fric_coulomb_Fc"); }},
      {"physics.fric_static_Fs", [](TrialConfig& c, const std::string& v, int ln) { c.physics.fric_static_Fs = parse_number(v, ln, "physics.fric_static_Fs"); }},
      {"physics.stribeck_vel_vs", [](TrialConfig& c, const std::string& v, int ln) { c.physics.stribeck_vel_vs = parse_number(v, ln, "physics.stribeck_vel_vs"); }},
      {"physics.fric_viscous_Kv_top", [](TrialConfig& c, const std::string& v, int ln) { c.physics.fric_viscous_Kv_top = parse_number(v, ln, "physics.fric_viscous_Kv_top"); }},
      {"physics.fric_viscous_Kv_bottom", [](TrialConfig& c, const std::string& v, int ln) { c.physics.fric_viscous_Kv_bottom = parse_number(v, ln, "physics.fric_viscous_Kv_bottom"); }},
      {"physics.sgn_smoothing_eps", [](TrialConfig& c, const std::string& v, int ln) { c.physics.sgn_smoothing_eps = parse_number(v, ln, "physics.sgn_smoothing_eps"); }},
      {"plant.dt", [](TrialConfig& c, const std::string& v, int ln) { c.dt = parse_number(v, ln, "plant.dt"); }},
      {"plant.track_length", [](TrialConfig& c, const std::string& v, int ln) { c.track_length = parse_number(v, ln, "plant.track_length"); }},
      {"sensors.encoder_resolution", [](TrialConfig& c, const std::string& v, int ln) { c.sensors.encoder_resolution = parse_number(v, ln, "sensors.encoder_resolution"); }},
      {"sensors.laser_noise_sigma", [](TrialConfig& c, const std::string& v, int ln) { c.sensors.laser_noise_sigma = parse_number(v, ln, "sensors.laser_noise_sigma"); }},
      {"sensors.laser_bias", [](TrialConfig& c, const std::string& v, int ln) { c.sensors.laser_bias = parse_number(v, ln, "sensors.laser_bias"); }},
      {"sensors.interrupter_positions",
       [](TrialConfig& c, const std::string& v, int ln) {
         const auto list = parse_list(v, ln, "sensors.interrupter_positions");
         if (list.size() != c.sensors.interrupter_positions.size()) {
           throw std::runtime_error(fmt::format(
               "config parse error at line {}: sensors.interrupter_positions "
               "needs exactly {} entries",
               ln, c.sensors.interrupter_positions.size()));
         }
         std::copy(list.begin(), list.end(), c.sensors.interrupter_positions.begin());
       }},
      {"sensors.interrupter_impulse", [](TrialConfig& c, const std::string& v, int ln) { c.sensors.interrupter_impulse = parse_number(v, ln, "sensors.interrupter_impulse"); }},
      {"sensors.interrupters_enabled", [](TrialConfig& c, const std::string& v, int ln) { c.interrupters_enabled = parse_bool(v, ln, "sensors.interrupters_enabled"); }},
      {"noise.q_pos", [](TrialConfig& c, const std::string& v, int ln) { c.noise.q_pos = parse_number(v, ln, "noise.q_pos"); }},
      {"noise.q_vel", [](TrialConfig& c, const std::string& v, int ln) { c.noise.q_vel = parse_number(v, ln, "noise.q_vel"); }},
      {"noise.r_encoder", [](TrialConfig& c, const std::string& v, int ln) { c.noise.r_encoder = parse_number(v, ln, "noise.r_encoder"); }},
      {"noise.r_laser", [](TrialConfig& c, const std::string& v, int ln) { c.noise.r_laser = parse_number(v, ln, "noise.r_laser"); }},
      {"noise.p0", [](TrialConfig& c, const std::string& v, int ln) { c.noise.p0 = parse_number(v, ln, "noise.p0"); }},
      {"noise.p0_matrix",
       [](TrialConfig& c, const std::string& v, int ln) {
         const auto list = parse_list(v, ln, "noise.p0_matrix");
         if (list.size() != 16) {
           throw std::runtime_error(fmt::format(
               "config parse error at line {}: noise.p0_matrix needs 16 entries",
               ln));
         }
         Eigen::Matrix4d m;
         for (int r = 0; r < 4; ++r) {
           for (int col = 0; col < 4; ++col) {
             m(r, col) = list[r * 4 + col];
           }
         }
         c.noise.p0_matrix = m;
       }},
      {"profile.start", [](TrialConfig& c, const std::string& v, int ln) { c.profile.start_pos = parse_number(v, ln, "profile.start"); }},
      {"profile.span", [](TrialConfig& c, const std::string& v, int ln) { c.profile.span = parse_number(v, ln, "profile.span"); }},
      {"profile.speeds_rpm", [](TrialConfig& c, const std::string& v, int ln) { c.profile.speeds_rpm = parse_list(v, ln, "profile.speeds_rpm"); }},
      {"profile.dwell", [](TrialConfig& c, const std::string& v, int ln) { c.profile.dwell_s = parse_number(v, ln, "profile.dwell"); }},
      {"profile.passes_per_speed", [](TrialConfig& c, const std::string& v, int ln) { c.profile.passes_per_speed = static_cast<int>(parse_number(v, ln, "profile.passes_per_speed")); }},
      {"profile.ramp_time", [](TrialConfig& c, const std::string& v, int ln) { c.profile.ramp_time_s = parse_number(v, ln, "profile.ramp_time"); }},
      {"control.velocity_gain", [](TrialConfig& c, const std::string& v, int ln) { c.control.velocity_gain = parse_number(v, ln, "control.velocity_gain"); }},
      {"control.max_force", [](TrialConfig& c, const std::string& v, int ln) { c.control.max_force_n = parse_number(v, ln, "control.max_force"); }},
      {"recovery.enabled", [](TrialConfig& c, const std::string& v, int ln) { c.recovery.enabled = parse_bool(v, ln, "recovery.enabled"); }},
      {"recovery.offset_threshold", [](TrialConfig& c, const std::string& v, int ln) { c.recovery.offset_threshold = parse_number(v, ln, "recovery.offset_threshold"); }},
      {"recovery.gain", [](TrialConfig& c, const std::string& v, int ln) { c.recovery.gain = parse_number(v, ln, "recovery.gain"); }},
      {"recovery.max_speed", [](TrialConfig& c, const std::string& v, int ln) { c.recovery.max_speed = parse_number(v, ln, "recovery.max_speed"); }},
      {"trial.duration", [](TrialConfig& c, const std::string& v, int ln) { c.duration_s = parse_number(v, ln, "trial.duration"); }},
      {"trial.seed", [](TrialConfig& c, const std::string& v, int ln) { c.seed = static_cast<std::uint64_t>(parse_number(v, ln, "trial.seed")); }},
      {"trial.weights", [](TrialConfig& c, const std::string& v, int ln) { c.weights = parse_list(v, ln, "trial.weights"); }},
      {"trial.speeds_rpm", [](TrialConfig& c, const std::string& v, int ln) { c.speeds_rpm = parse_list(v, ln, "trial.speeds_rpm"); }},
      {"trial.mode", [](TrialConfig& c, const std::string& v, int ln) { c.mode = parse_mode(v, ln); }},
      {"trial.out_dir", [](TrialConfig& c, const std::string& v, int ln) { (void)ln; c.out_dir = v; }},
      {"disturbance.schedule", [](TrialConfig& c, const std::string& v, int ln) { const double scale = c.disturbance.velocity_scale; c.disturbance = parse_schedule(v, ln); c.disturbance.velocity_scale = scale; }},
      {"disturbance.velocity_scale", [](TrialConfig& c, const std::string& v, int ln) { c.disturbance.velocity_scale = parse_number(v, ln, "disturbance.velocity_scale"); }},
      {"calibrate.target_detach_kg", [](TrialConfig& c, const std::string& v, int ln) { c.calibrate_target_kg = parse_number(v, ln, "calibrate.target_detach_kg"); }},
  };

  for (const auto& [line_no, line] : lines) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(fmt::format(
          "config parse error at line {}: expected 'key = value'", line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw std::runtime_error(fmt::format(
          "config parse error at line {}: unknown key '{}'", line_no, key));
    }
    it->second(cfg, value, line_no);
  }

  cfg.sensors.rng_seed = cfg.seed;
  cfg.validate();
  return cfg;
}

void write_physics_config(const PhysicalParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open params file for writing: " + path);
  }
  out << "# calibrated physical parameters\n";
  out << fmt::format("physics.mu0 = {:.15g}\n", p.mu0);
  out << fmt::format("physics.magnetization_M = {:.15g}\n", p.magnetization_M);
  out << fmt::format("physics.coupling_Kd = {:.15g}\n", p.coupling_Kd);
  out << fmt::format("physics.radius_R = {:.15g}\n", p.radius_R);
  out << fmt::format("physics.height_h = {:.15g}\n", p.height_h);
  out << fmt::format("physics.separation_d = {:.15g}\n", p.separation_d);
  out << fmt::format("physics.mass_bottom_m1 = {:.15g}\n", p.mass_bottom_m1);
  out << fmt::format("physics.mass_top_m2 = {:.15g}\n", p.mass_top_m2);
  out << fmt::format("physics.fric_coulomb_Fc = {:.15g}\n", p.fric_coulomb_Fc);
  out << fmt::format("physics.fric_static_Fs = {:.15g}\n", p.fric_static_Fs);
  out << fmt::format("physics.stribeck_vel_vs = {:.15g}\n", p.stribeck_vel_vs);
  out << fmt::format("physics.fric_viscous_Kv_top = {:.15g}\n", p.fric_viscous_Kv_top);
  out << fmt::format("physics.fric_viscous_Kv_bottom = {:.15g}\n", p.fric_viscous_Kv_bottom);
  out << fmt::format("physics.sgn_smoothing_eps = {:.15g}\n", p.sgn_smoothing_eps);
}

void write_noise_config(const NoiseConfig& noise, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open noise file for writing: " + path);
  }
  out << "# tuned estimator noise settings\n";
  out << fmt::format("noise.q_pos = {:.15g}\n", noise.Q(0, 0));
  out << fmt::format("noise.q_vel = {:.15g}\n", noise.Q(1, 1));
  out << fmt::format("noise.r_encoder = {:.15g}\n", noise.r_encoder);
  out << fmt::format("noise.r_laser = {:.15g}\n", noise.r_laser);
  std::string p0;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (!p0.empty()) {
        p0 += ",";
      }
      p0 += fmt::format("{:.15g}", noise.P0(r, c));
    }
  }
  out << "noise.p0_matrix = " << p0 << "\n";
}

}  // namespace magsim

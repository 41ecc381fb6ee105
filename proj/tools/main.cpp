#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "magsim/config.hpp"
#include "magsim/harness.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::int64_t> seed;
  std::string mode;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Trial configuration file");
  cmd->add_option("--out", flags.out_dir, "Output directory (default: out)");
  cmd->add_option("--seed", flags.seed, "Noise-stream seed");
  cmd->add_option("--mode", flags.mode, "Estimator mode: full, partial or both")
      ->check(CLI::IsMember({"full", "partial", "both"}));
}

magsim::TrialConfig resolve_config(magsim::ScenarioKind kind,
                                   const CommonFlags& flags) {
  magsim::TrialConfig cfg = flags.config_path.empty()
                                ? magsim::default_config(kind)
                                : magsim::load_config(flags.config_path, kind);
  if (flags.seed) {
    cfg.seed = static_cast<std::uint64_t>(*flags.seed);
    cfg.sensors.rng_seed = cfg.seed;
  }
  if (!flags.out_dir.empty()) {
    cfg.out_dir = flags.out_dir;
  }
  if (flags.mode == "full") {
    cfg.mode = magsim::RunMode::kFull;
  } else if (flags.mode == "partial") {
    cfg.mode = magsim::RunMode::kPartial;
  } else if (flags.mode == "both") {
    cfg.mode = magsim::RunMode::kBoth;
  }
  return cfg;
}

void print_summary(const magsim::TrialConfig& cfg) {
  std::ifstream in(magsim::summary_path(cfg));
  std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled-magnet actuator simulation and estimation toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;
  CLI::App* static_cmd =
      app.add_subcommand("static-trial", "Static detachment characterization");
  CLI::App* dynamic_cmd =
      app.add_subcommand("dynamic-trial", "Dynamic offset sweep over speeds and weights");
  CLI::App* human_cmd =
      app.add_subcommand("human-trial", "Estimation trial with full/partial observability");
  CLI::App* recovery_cmd =
      app.add_subcommand("recovery-demo", "Perturbation recovery on/off comparison");
  CLI::App* tune_cmd = app.add_subcommand("tune", "Offline estimator noise tuning");
  CLI::App* calibrate_cmd =
      app.add_subcommand("calibrate", "Calibrate the coupling constant against the detachment window");
  for (CLI::App* cmd : {static_cmd, dynamic_cmd, human_cmd, recovery_cmd,
                        tune_cmd, calibrate_cmd}) {
    add_common_flags(cmd, flags);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (static_cmd->parsed()) {
      const auto cfg = resolve_config(magsim::ScenarioKind::kStatic, flags);
      magsim::run_static_trial(cfg);
      print_summary(cfg);
    } else if (dynamic_cmd->parsed()) {
      const auto cfg = resolve_config(magsim::ScenarioKind::kDynamic, flags);
      magsim::run_dynamic_trial(cfg);
      print_summary(cfg);
    } else if (human_cmd->parsed()) {
      const auto cfg = resolve_config(magsim::ScenarioKind::kHuman, flags);
      magsim::run_human_trial(cfg);
      print_summary(cfg);
    } else if (recovery_cmd->parsed()) {
      const auto cfg = resolve_config(magsim::ScenarioKind::kRecovery, flags);
      magsim::run_recovery_demo(cfg);
      print_summary(cfg);
    } else if (tune_cmd->parsed()) {
      const auto cfg = resolve_config(magsim::ScenarioKind::kTune, flags);
      magsim::run_tune(cfg);
      print_summary(cfg);
    } else if (calibrate_cmd->parsed()) {
      const auto cfg = resolve_config(magsim::ScenarioKind::kCalibrate, flags);
      magsim::run_calibrate(cfg);
      print_summary(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

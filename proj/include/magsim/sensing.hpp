#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "magsim/plant.hpp"

namespace magsim {

enum class MeasureMode { kFull, kPartial };

struct Measurement {
  Eigen::VectorXd z;  // positions, m; length 2 (full) or 1 (partial)
  MeasureMode mode = MeasureMode::kFull;
  double t = 0.0;
};

struct SensorParams {
  double encoder_resolution = 1e-4;  // m per count
  double laser_noise_sigma = 1e-3;   // m
  double laser_bias = 0.0;           // m
  std::array<double, 5> interrupter_positions{0.0, 0.15, 0.30, 0.45, 0.60};
  double interrupter_impulse = 0.005;  // N*s, applied over one step
  std::uint64_t rng_seed = 1;

  void validate(double track_length = kDefaultTrackLength) const;
};

/// Simulated encoder + laser pair. Owns the measurement-noise stream, so use
/// one instance per trial; the read sequence is reproducible from the seed.
class SensorSuite {
 public:
  explicit SensorSuite(const SensorParams& params);

  /// Bottom position quantized to the nearest encoder count. Deterministic.
  double encoder_read(const PlantState& state) const;
  /// Top position plus bias plus one Gaussian noise draw.
  double laser_read(const PlantState& state);
  Measurement measure(const PlantState& state, MeasureMode mode);

  const SensorParams& params() const { return params_; }

 private:
  SensorParams params_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> unit_normal_{0.0, 1.0};
};

/// Photo-interrupter crossing detector. A small hysteresis band keeps a body
/// dwelling on a sensor from retriggering it.
class InterrupterBank {
 public:
  struct Event {
    int index;      // which interrupter fired
    int direction;  // +1 upward crossing, -1 downward
  };

  InterrupterBank(std::span<const double> positions, double initial_pos,
                  double band = 1e-3);

  /// Feed the new bottom position; returns the crossing completed this step,
  /// if any.
  std::optional<Event> advance(double pos);

 private:
  struct Channel {
    double position;
    int side;  // -1 below, +1 above, 0 unknown (inside the band)
  };
  std::vector<Channel> channels_;
  double band_;
};

}  // namespace magsim

#include "magsim/sensing.hpp"

#include <cmath>
#include <stdexcept>

namespace magsim {

void SensorParams::validate(double track_length) const {
  if (!(encoder_resolution > 0.0)) {
    throw std::invalid_argument("encoder_resolution must be positive");
  }
  if (laser_noise_sigma < 0.0) {
    throw std::invalid_argument("laser_noise_sigma must be non-negative");
  }
  if (interrupter_impulse < 0.0) {
    throw std::invalid_argument("interrupter_impulse must be non-negative");
  }
  for (double pos : interrupter_positions) {
    if (pos < 0.0 || pos > track_length) {
      throw std::invalid_argument("interrupter positions must lie on the track");
    }
  }
}

SensorSuite::SensorSuite(const SensorParams& params)
    : params_(params), rng_(params.rng_seed) {}

double SensorSuite::encoder_read(const PlantState& state) const {
  const double res = params_.encoder_resolution;
  return std::round(state.bottom_pos / res) * res;
}

double SensorSuite::laser_read(const PlantState& state) {
  double noise = 0.0;
  if (params_.laser_noise_sigma > 0.0) {
    noise = params_.laser_noise_sigma * unit_normal_(rng_);
  }
  return state.top_pos + params_.laser_bias + noise;
}

Measurement SensorSuite::measure(const PlantState& state, MeasureMode mode) {
  Measurement m;
  m.mode = mode;
  m.t = state.time;
  if (mode == MeasureMode::kFull) {
    m.z.resize(2);
    m.z << encoder_read(state), laser_read(state);
  } else {
    m.z.resize(1);
    m.z << encoder_read(state);
  }
  return m;
}

InterrupterBank::InterrupterBank(std::span<const double> positions,
                                 double initial_pos, double band)
    : band_(band) {
  channels_.reserve(positions.size());
  for (double pos : positions) {
    int side = 0;
    if (initial_pos > pos + band_) {
      side = 1;
    } else if (initial_pos < pos - band_) {
      side = -1;
    }
    channels_.push_back({pos, side});
  }
}

std::optional<InterrupterBank::Event> InterrupterBank::advance(double pos) {
  std::optional<Event> event;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    Channel& ch = channels_[i];
    if (pos > ch.position + band_) {
      if (ch.side == -1) {
        event = Event{static_cast<int>(i), +1};
      }
      ch.side = 1;
    } else if (pos < ch.position - band_) {
      if (ch.side == 1) {
        event = Event{static_cast<int>(i), -1};
      }
      ch.side = -1;
    }
  }
  return event;
}

}  // namespace magsim

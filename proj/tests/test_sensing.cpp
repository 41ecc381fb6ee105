#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "magsim/sensing.hpp"

using namespace magsim;

namespace {

PlantState at_positions(double bottom, double top) {
  return PlantState{bottom, 0.0, top, 0.0, 0.0};
}

}  // namespace

TEST_CASE("encoder quantizes to the nearest count") {
  SensorParams sp;
  sp.encoder_resolution = 1e-4;
  SensorSuite suite(sp);
  CHECK(suite.encoder_read(at_positions(0.0, 0.0)) == 0.0);
  CHECK(suite.encoder_read(at_positions(0.01234, 0.0)) == doctest::Approx(0.0123).epsilon(1e-12));
  for (int i = 0; i < 500; ++i) {
    const double x = 0.6 * i / 499.0;
    CHECK(std::abs(suite.encoder_read(at_positions(x, 0.0)) - x) <=
          sp.encoder_resolution / 2.0 + 1e-15);
  }
}

TEST_CASE("noiseless laser reads the exact top position") {
  SensorParams sp;
  sp.laser_noise_sigma = 0.0;
  sp.laser_bias = 0.0;
  SensorSuite suite(sp);
  CHECK(suite.laser_read(at_positions(0.0, 0.2718)) == 0.2718);
}

TEST_CASE("laser noise has the configured statistics") {
  SensorParams sp;
  sp.laser_noise_sigma = 3e-3;
  sp.laser_bias = 5e-4;
  sp.rng_seed = 42;
  SensorSuite suite(sp);
  const PlantState s = at_positions(0.0, 0.3);
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    sum += suite.laser_read(s);
  }
  const double mean = sum / n;
  // Law of large numbers: sample mean within 3*sigma/sqrt(n) of truth + bias.
  CHECK(std::abs(mean - (0.3 + sp.laser_bias)) <= 3.0 * sp.laser_noise_sigma / 100.0);
}

TEST_CASE("identical seeds reproduce the measurement stream") {
  SensorParams sp;
  sp.rng_seed = 1234;
  SensorSuite a(sp);
  SensorSuite b(sp);
  const PlantState s = at_positions(0.1, 0.2);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.laser_read(s) == b.laser_read(s));
  }
}

TEST_CASE("measure respects the observability mode") {
  SensorParams sp;
  sp.laser_noise_sigma = 0.0;
  sp.encoder_resolution = 1e-12;
  SensorSuite suite(sp);
  const PlantState s = at_positions(0.123456, 0.234567);
  const Measurement full = suite.measure(s, MeasureMode::kFull);
  CHECK(full.z.size() == 2);
  CHECK(full.z(0) == doctest::Approx(0.123456).epsilon(1e-12));
  CHECK(full.z(1) == 0.234567);
  const Measurement partial = suite.measure(s, MeasureMode::kPartial);
  CHECK(partial.z.size() == 1);
  CHECK(partial.mode == MeasureMode::kPartial);
}

TEST_CASE("full measurements stay within five sigma almost always") {
  SensorParams sp;
  sp.laser_noise_sigma = 3e-3;
  sp.rng_seed = 7;
  SensorSuite suite(sp);
  const PlantState s = at_positions(0.25, 0.35);
  const int n = 100000;
  int within = 0;
  for (int i = 0; i < n; ++i) {
    const Measurement m = suite.measure(s, MeasureMode::kFull);
    const bool ok = std::abs(m.z(0) - 0.25) <= 5.0 * sp.encoder_resolution &&
                    std::abs(m.z(1) - 0.35) <= 5.0 * sp.laser_noise_sigma;
    within += ok ? 1 : 0;
  }
  CHECK(within >= n * 9999 / 10000);
}

TEST_CASE("interrupters fire once per crossing direction") {
  const std::vector<double> positions{0.0, 0.15, 0.30, 0.45, 0.60};
  InterrupterBank bank(positions, 0.2);
  int events = 0;
  // Sweep past 0.30 and back.
  for (double x = 0.2; x < 0.40; x += 1e-3) {
    if (auto e = bank.advance(x)) {
      ++events;
      CHECK(e->index == 2);
      CHECK(e->direction == 1);
    }
  }
  CHECK(events == 1);
  for (double x = 0.40; x > 0.2; x -= 1e-3) {
    if (auto e = bank.advance(x)) {
      ++events;
      CHECK(e->direction == -1);
    }
  }
  CHECK(events == 2);
}

TEST_CASE("trajectories that avoid the sensors emit no events") {
  const std::vector<double> positions{0.0, 0.15, 0.30, 0.45, 0.60};
  InterrupterBank bank(positions, 0.2);
  for (double x = 0.2; x < 0.29; x += 1e-4) {
    CHECK_FALSE(bank.advance(x).has_value());
  }
}

TEST_CASE("dwelling on a sensor does not retrigger it") {
  const std::vector<double> positions{0.15};
  InterrupterBank bank(positions, 0.10);
  int events = 0;
  for (double x = 0.10; x < 0.1495; x += 1e-4) {
    events += bank.advance(x).has_value() ? 1 : 0;
  }
  // Jitter right on the sensor, inside the hysteresis band.
  for (int i = 0; i < 200; ++i) {
    events += bank.advance(0.1495 + 2e-4 * (i % 2)).has_value() ? 1 : 0;
  }
  CHECK(events == 0);
  // Completing the traversal fires exactly once.
  for (double x = 0.15; x < 0.17; x += 1e-4) {
    events += bank.advance(x).has_value() ? 1 : 0;
  }
  CHECK(events == 1);
}

TEST_CASE("sensor parameter validation") {
  SensorParams sp;
  sp.encoder_resolution = 0.0;
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
  SensorParams sp2;
  sp2.interrupter_positions[2] = 0.9;
  CHECK_THROWS_AS(sp2.validate(), std::invalid_argument);
  SensorParams ok;
  CHECK_NOTHROW(ok.validate());
}

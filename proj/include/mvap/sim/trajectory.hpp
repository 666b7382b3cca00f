#pragma once

#include <cstdint>
#include <vector>

#include "mvap/attitude.hpp"

namespace mvap::sim {

// Smooth synthetic pitch/roll time series standing in for a recorded flight.
struct Trajectory {
  std::vector<AttitudeSample> samples;  // strictly increasing timestamps
  double sample_rate_hz = 0.0;
};

struct TrajectoryConfig {
  double duration_s = 600.0;
  double sample_rate_hz = 4.0;
  std::uint64_t seed = 0;
  double pitch_bound_deg = 10.0;  // |pitch| stays within this bound
  double roll_bound_deg = 15.0;
};

// Sum of seeded sinusoids plus slow low-pass-filtered noise, sampled at the
// requested rate. Deterministic given the seed. Consecutive samples differ by
// at most 2 degrees in each channel; throws invalid-config (std::invalid_argument)
// when duration or rate is non-positive or the rate is too low to honor that
// smoothness bound.
Trajectory simulate_trajectory(const TrajectoryConfig& cfg);

}  // namespace mvap::sim

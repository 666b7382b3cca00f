#include "mvap/sim/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "mvap/rng.hpp"

namespace mvap::sim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// One pitch or roll channel: three sinusoids with seeded phases and slightly
// jittered frequencies, plus a slow random-walk drift pushed through a
// one-pole low-pass. Amplitude fractions sum to 1 so |value| <= bound.
struct Channel {
  double amp[3];
  double freq_hz[3];
  double phase[3];
  double drift_amp;

  static Channel make(double bound, Rng& rng) {
    // Base frequencies are incommensurate so band crossings interleave and
    // all nine classes get visited over a few minutes of simulated flight.
    static constexpr double kBaseFreq[3] = {0.021, 0.047, 0.113};
    static constexpr double kAmpFrac[3] = {0.52, 0.26, 0.12};
    Channel c{};
    for (int i = 0; i < 3; ++i) {
      c.amp[i] = kAmpFrac[i] * bound;
      c.freq_hz[i] = kBaseFreq[i] * rng.uniform(0.85, 1.15);
      c.phase[i] = rng.uniform(0.0, kTwoPi);
    }
    c.drift_amp = 0.10 * bound;
    return c;
  }

  double max_slope_deg_s() const {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += amp[i] * kTwoPi * freq_hz[i];
    return s;
  }

  double eval(double t) const {
    double v = 0.0;
    for (int i = 0; i < 3; ++i)
      v += amp[i] * std::sin(kTwoPi * freq_hz[i] * t + phase[i]);
    return v;
  }
};

}  // namespace

Trajectory simulate_trajectory(const TrajectoryConfig& cfg) {
  if (!(cfg.duration_s > 0.0))
    throw std::invalid_argument("simulate_trajectory: duration_s must be > 0");
  if (!(cfg.sample_rate_hz > 0.0))
    throw std::invalid_argument(
        "simulate_trajectory: sample_rate_hz must be > 0");
  if (!(cfg.pitch_bound_deg > 0.0) || !(cfg.roll_bound_deg > 0.0))
    throw std::invalid_argument(
        "simulate_trajectory: amplitude bounds must be > 0");
  // Timestamps are integer milliseconds with exactly uniform spacing.
  const double step_ms = 1000.0 / cfg.sample_rate_hz;
  if (std::fabs(step_ms - std::round(step_ms)) > 1e-9)
    throw std::invalid_argument(
        "simulate_trajectory: 1000/sample_rate_hz must be a whole number of "
        "milliseconds for uniform timestamps");

  Rng shape_rng(Rng::derive(cfg.seed, 1));
  const Channel pitch = Channel::make(cfg.pitch_bound_deg, shape_rng);
  const Channel roll = Channel::make(cfg.roll_bound_deg, shape_rng);

  // Smoothness bound: 2 degrees between consecutive samples. The drift is
  // low-passed hard enough that the sinusoid slope dominates; budget 10% for it.
  const double dt = 1.0 / cfg.sample_rate_hz;
  const double slope_budget = 2.0 / dt;
  const double worst =
      std::max(pitch.max_slope_deg_s(), roll.max_slope_deg_s()) * 1.1;
  if (worst > slope_budget)
    throw std::invalid_argument(
        "simulate_trajectory: sample_rate_hz too low for the 2-degree "
        "smoothness bound at these amplitude bounds");

  const auto n = static_cast<std::int64_t>(std::llround(cfg.duration_s * cfg.sample_rate_hz));

  Rng drift_rng(Rng::derive(cfg.seed, 2));
  double pitch_drift = 0.0, roll_drift = 0.0;
  // One-pole low-pass over white steps; time constant ~20 s.
  const double lp = std::exp(-dt / 20.0);

  Trajectory traj;
  traj.sample_rate_hz = cfg.sample_rate_hz;
  traj.samples.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    pitch_drift = lp * pitch_drift + (1.0 - lp) * drift_rng.uniform(-1.0, 1.0);
    roll_drift = lp * roll_drift + (1.0 - lp) * drift_rng.uniform(-1.0, 1.0);
    AttitudeSample s;
    s.timestamp_ms = static_cast<std::int64_t>(std::llround(t * 1000.0));
    s.pitch_deg = pitch.eval(t) + pitch.drift_amp * pitch_drift;
    s.roll_deg = roll.eval(t) + roll.drift_amp * roll_drift;
    traj.samples.push_back(s);
  }
  return traj;
}

}  // namespace mvap::sim

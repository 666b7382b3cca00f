#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace mvap {

inline constexpr int kNumClasses = 9;

// Timestamped pitch/roll ground truth, degrees. Nose-up pitch positive,
// right-roll positive.
struct AttitudeSample {
  std::int64_t timestamp_ms = 0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
};

// One of the nine discrete attitude classes. id <-> short_name is a bijection.
struct AttitudeClass {
  int id;
  std::string_view short_name;
};

// Degree threshold separating the level band from the nose-up/down and
// roll classes.
struct BinningConfig {
  double alpha_deg = 3.0;
};

// All nine classes, ordered by id.
const std::array<AttitudeClass, kNumClasses>& attitude_classes();

// Class for a given id; throws std::out_of_range for ids outside 0..8.
const AttitudeClass& attitude_class(int id);

// Maps (pitch, roll) to its attitude class. The nine band predicates
// partition the plane: the level band is inclusive (-alpha <= x <= +alpha),
// beyond-band comparisons are strict. Throws std::invalid_argument on
// non-finite input or non-positive alpha.
const AttitudeClass& classify_attitude(double pitch_deg, double roll_deg,
                                       const BinningConfig& cfg = {});

// Per-class sample counts; entries sum to samples.size().
std::array<std::int64_t, kNumClasses> class_histogram(
    std::span<const AttitudeSample> samples, const BinningConfig& cfg = {});

}  // namespace mvap

#include "mvap/attitude.hpp"

#include <cmath>
#include <stdexcept>

namespace mvap {

const std::array<AttitudeClass, kNumClasses>& attitude_classes() {
  static const std::array<AttitudeClass, kNumClasses> table = {{
      {0, "NU"},
      {1, "ND"},
      {2, "RP"},
      {3, "RN"},
      {4, "NU+RP"},
      {5, "NU+RN"},
      {6, "ND+RP"},
      {7, "ND+RN"},
      {8, "L"},
  }};
  return table;
}

const AttitudeClass& attitude_class(int id) {
  if (id < 0 || id >= kNumClasses)
    throw std::out_of_range("attitude_class: id must be in 0..8, got " +
                            std::to_string(id));
  return attitude_classes()[static_cast<std::size_t>(id)];
}

const AttitudeClass& classify_attitude(double pitch_deg, double roll_deg,
                                       const BinningConfig& cfg) {
  if (!std::isfinite(pitch_deg) || !std::isfinite(roll_deg))
    throw std::invalid_argument("classify_attitude: non-finite pitch or roll");
  if (!(cfg.alpha_deg > 0.0) || !std::isfinite(cfg.alpha_deg))
    throw std::invalid_argument("classify_attitude: alpha_deg must be > 0");

  const double a = cfg.alpha_deg;
  // Band index: -1 below -alpha, 0 inside the inclusive level band, +1 above.
  const int pb = pitch_deg > a ? 1 : (pitch_deg < -a ? -1 : 0);
  const int rb = roll_deg > a ? 1 : (roll_deg < -a ? -1 : 0);

  // [pitch band + 1][roll band + 1]
  static constexpr int kIds[3][3] = {
      {7, 1, 6},  // pitch < -alpha: ND+RN, ND, ND+RP
      {3, 8, 2},  // level pitch:    RN,    L,  RP
      {5, 0, 4},  // pitch > +alpha: NU+RN, NU, NU+RP
  };
  return attitude_classes()[static_cast<std::size_t>(kIds[pb + 1][rb + 1])];
}

std::array<std::int64_t, kNumClasses> class_histogram(
    std::span<const AttitudeSample> samples, const BinningConfig& cfg) {
  std::array<std::int64_t, kNumClasses> counts{};
  for (const auto& s : samples)
    ++counts[static_cast<std::size_t>(
        classify_attitude(s.pitch_deg, s.roll_deg, cfg).id)];
  return counts;
}

}  // namespace mvap

#pragma once

#include <numbers>

namespace memsim {

// 2019 SI exact values.
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kHbar = 1.054571817e-34;      // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J / K

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// All public interfaces use ordinary frequencies in Hz; formulas run on
// angular rates internally. These two helpers are the only conversion point.
constexpr double angular(double f_hz) { return kTwoPi * f_hz; }
constexpr double ordinary(double omega_rad_s) { return omega_rad_s / kTwoPi; }

}  // namespace memsim

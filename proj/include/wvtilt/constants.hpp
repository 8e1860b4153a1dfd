#pragma once

#include <numbers>

namespace wvtilt::constants {

inline constexpr double pi = std::numbers::pi;

// CODATA 2018 (exact SI definitions)
inline constexpr double planck = 6.62607015e-34;      // J s
inline constexpr double speed_of_light = 299792458.0;  // m / s

}  // namespace wvtilt::constants

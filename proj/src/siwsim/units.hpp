#pragma once

#include <cmath>

namespace siwsim {

// Exact by definition of the metre.
inline constexpr double kSpeedOfLightMps = 299'792'458.0;

constexpr double hz_from_ghz(double ghz) { return ghz * 1e9; }
constexpr double hz_from_mhz(double mhz) { return mhz * 1e6; }
constexpr double ghz_from_hz(double hz) { return hz * 1e-9; }
constexpr double mhz_from_hz(double hz) { return hz * 1e-6; }

constexpr double m_from_mm(double mm) { return mm * 1e-3; }
constexpr double mm_from_m(double m) { return m * 1e3; }

inline double ratio_from_db(double db) { return std::pow(10.0, db / 10.0); }
inline double db_from_ratio(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace siwsim

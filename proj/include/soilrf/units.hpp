// SPDX-License-Identifier: MIT
#ifndef SOILRF_UNITS_HPP
#define SOILRF_UNITS_HPP

#include <cmath>

#include "soilrf/error.hpp"

namespace soilrf {

// Physical constants (SI).
inline constexpr double kSpeedOfLight = 2.99792458e8;          // m/s
inline constexpr double kVacuumPermittivity = 8.8541878128e-12; // F/m

// Frequencies cross the API boundary in MHz and are converted to Hz exactly
// once, via this helper, before entering any physics formula.
inline double mhz_to_hz(double f_mhz) { return f_mhz * 1e6; }

inline double dbm_to_mw(double p_dbm) { return std::pow(10.0, p_dbm / 10.0); }

inline double mw_to_dbm(double p_mw) {
    if (!(p_mw > 0.0))
        fail(ErrorKind::numeric, "mw_to_dbm: power must be > 0 mW");
    return 10.0 * std::log10(p_mw);
}

// dB change of a positive amplitude ratio.
inline double amplitude_ratio_to_db(double ratio) {
    if (!(ratio > 0.0))
        fail(ErrorKind::numeric, "amplitude_ratio_to_db: ratio must be > 0");
    return 20.0 * std::log10(ratio);
}

} // namespace soilrf

#endif

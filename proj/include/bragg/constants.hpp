#pragma once

#include <numbers>

// CODATA 2018 values, SI units.
namespace bragg::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double hbar = 1.054571817e-34;          // J s (exact via h)
inline constexpr double boltzmann = 1.380649e-23;        // J/K (exact)
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

// 87Rb atomic mass 86.909180531 u.
inline constexpr double rb87_mass = 86.909180531 * atomic_mass_unit;
// Rb D2 line (Bragg light detuned by a few GHz; the shift in k is ~10 ppb).
inline constexpr double rb87_d2_wavelength = 780.24e-9;

}  // namespace bragg::constants

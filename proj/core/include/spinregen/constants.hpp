#pragma once

#include <numbers>

// CODATA 2018 exact / recommended values, SI units.
namespace spinregen::phys {

inline constexpr double kBoltzmann = 1.380649e-23;        // J/K
inline constexpr double kSpeedOfLight = 299792458.0;      // m/s
inline constexpr double kPlanck = 6.62607015e-34;         // J s
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 133Cs
inline constexpr double kCesiumMass = 132.905451933 * kAtomicMassUnit;
inline constexpr double kCesiumHyperfineHz = 9.192631770e9;
inline constexpr double kCesiumD2Wavelength = 852.347e-9;
inline constexpr double kCesiumD1Wavelength = 894.593e-9;
// F=3 share of the 16 ground Zeeman sublevels at thermal equilibrium.
inline constexpr double kCesiumLowerHyperfineFraction = 7.0 / 16.0;

// 87Rb
inline constexpr double kRubidium87HyperfineHz = 6.834682611e9;

}  // namespace spinregen::phys

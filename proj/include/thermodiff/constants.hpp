#pragma once

// CODATA 2018 recommended values, SI units.
namespace thermodiff::codata2018 {

inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double boltzmann = 1.380649e-23;       // J / K (exact)
inline constexpr double electron_mass = 9.1093837015e-31;  // kg

}  // namespace thermodiff::codata2018

#pragma once

// Physical constants and the natural-unit <-> SI bridge.
//
// Internally every quantity is expressed with hbar = m = e = 1 and lengths in
// units of a user-chosen scale L0. The table below is the only place physical
// constants live; values are CODATA rounded to 4 significant digits.

namespace curvspin {

namespace codata {
inline constexpr double hbar = 1.055e-34;          // J s
inline constexpr double elementary_charge = 1.602e-19;  // C
inline constexpr double electron_mass = 9.109e-31;  // kg
inline constexpr double speed_of_light = 2.998e8;   // m / s
inline constexpr double pi = 3.14159265358979323846;
}  // namespace codata

/// hbar^2 / (2 m_e) in eV m^2, as quoted for the SOI-radius estimate.
inline constexpr double kSoiRadiusNumerator = 3.79e-20;

/// Maps natural-unit results to SI.
struct PhysicalScale {
  double length_m = 1e-9;  ///< L0
  double mass_ratio = 1.0; ///< m / m_e

  double mass_kg() const { return mass_ratio * codata::electron_mass; }

  /// Energy unit hbar^2 / (m L0^2) in eV.
  double energy_unit_ev() const {
    return codata::hbar * codata::hbar / (mass_kg() * length_m * length_m) /
           codata::elementary_charge;
  }

  /// Field unit hbar / (e L0^2) in tesla.
  double field_unit_tesla() const {
    return codata::hbar / (codata::elementary_charge * length_m * length_m);
  }

  /// Time unit m L0^2 / hbar in seconds.
  double time_unit_s() const { return mass_kg() * length_m * length_m / codata::hbar; }
};

}  // namespace curvspin

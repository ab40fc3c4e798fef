#pragma once

// Internal unit system: meV for energy, Angstrom for length, radians for
// angles, Kelvin for temperature. Wave vectors are Angstrom^-1 internally and
// nm^-1 only at I/O boundaries.

namespace qreflect::units {

/// CODATA 2018 values. This is the only place physical constants are defined.
struct PhysicalConstants {
    double hbar;           ///< J s
    double he_mass;        ///< kg, 4He atom
    double k_boltzmann_si; ///< J / K
    double joule_per_mev;  ///< J / meV
    double hbar2_over_2m;  ///< meV Angstrom^2 for 4He
    double k_boltzmann;    ///< meV / K
};

namespace detail {
inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kHeliumMass = 6.6464731e-27;
inline constexpr double kBoltzmannSI = 1.380649e-23;
inline constexpr double kJoulePerMeV = 1.602176634e-22;
inline constexpr double kSquareAngstromPerSquareMetre = 1.0e20;
} // namespace detail

inline constexpr PhysicalConstants kConstants{
    detail::kHbar,
    detail::kHeliumMass,
    detail::kBoltzmannSI,
    detail::kJoulePerMeV,
    detail::kHbar * detail::kHbar / (2.0 * detail::kHeliumMass) /
        detail::kJoulePerMeV * detail::kSquareAngstromPerSquareMetre,
    detail::kBoltzmannSI / detail::kJoulePerMeV,
};

inline constexpr const PhysicalConstants& constants() { return kConstants; }

/// hbar^2 / (2 m_He) in meV Angstrom^2.
inline constexpr double kinetic_prefactor() { return kConstants.hbar2_over_2m; }

inline constexpr double kPerNmPerAngstrom = 10.0; // 1 A^-1 = 10 nm^-1

inline constexpr double to_per_nm(double k_per_angstrom) {
    return k_per_angstrom * kPerNmPerAngstrom;
}
inline constexpr double to_per_angstrom(double k_per_nm) {
    return k_per_nm / kPerNmPerAngstrom;
}

inline constexpr double mrad_to_rad(double mrad) { return mrad * 1.0e-3; }
inline constexpr double rad_to_mrad(double rad) { return rad * 1.0e3; }

double mev_to_joule(double energy_mev);
double joule_to_mev(double energy_joule);

/// Converts a van der Waals coefficient from J m^3 to meV Angstrom^3.
/// Throws DomainError for non-positive input.
double c3_to_internal(double c3_si);

} // namespace qreflect::units

#pragma once

#include <vector>

namespace qreflect {

/// Result of the Morse/Casimir C1 matching.
struct MatchingSolution {
    double d_well; ///< Morse depth D, meV
    double z_bar;  ///< matching point, Angstrom
};

/// Bracket scanned for the matching point, Angstrom.
inline constexpr double kMatchingBracketLow = 0.1;
inline constexpr double kMatchingBracketHigh = 50.0;
inline constexpr int kMatchingScanPoints = 10000;

/// Solves V_M(z) = V_C(z), V_M'(z) = V_C'(z) for (D, z_bar).
///
/// The ratio V'/V eliminates D, so z_bar depends on (chi, l) only; D then
/// follows from the value condition. The bracket is scanned for sign changes
/// and each one is refined by bisection. Throws MatchingError when no root or
/// more than one root is found, DomainError for non-positive arguments.
MatchingSolution solve_matching(double chi, double c3, double l);

/// Perpendicular atom-surface interaction: Morse core, Casimir-van der Waals
/// tail, joined with a continuous first derivative at z_bar.
struct SurfacePotential {
    double chi;    ///< Morse stiffness, Angstrom^-1
    double c3;     ///< meV Angstrom^3
    double l;      ///< van der Waals -> Casimir crossover length, Angstrom
    double c4;     ///< c3 * l, meV Angstrom^4
    double d_well; ///< meV
    double z_bar;  ///< Angstrom

    /// Builds the potential and solves the matching problem.
    static SurfacePotential from_matching(double chi, double c3, double l);

    double morse(double z) const;
    double morse_derivative(double z) const;
    double casimir(double z) const;
    double casimir_derivative(double z) const;

    double value(double z) const { return z < z_bar ? morse(z) : casimir(z); }
    double derivative(double z) const {
        return z < z_bar ? morse_derivative(z) : casimir_derivative(z);
    }
};

/// V(z) in meV.
inline double v_perp(double z, const SurfacePotential& p) { return p.value(z); }

/// How the Fourier components of the strip profile enter the channel
/// couplings. `normalized` keeps V_0 = V and scales V_n by c_n / c_0.
enum class CouplingConvention { fourier, normalized, doubled_sinc };

const char* to_string(CouplingConvention c);
CouplingConvention coupling_convention_from_string(const char* name);

/// Periodic strip grating: strips of width a, period d.
struct Grating {
    double a;
    double d;
    int n_max = 10;
    CouplingConvention coupling = CouplingConvention::normalized;

    /// Throws DomainError unless 0 < a < d and n_max >= 0.
    void validate() const;
    double fill_fraction() const { return a / d; }
};

/// sin(pi x) / (pi x), exactly zero at non-zero integers.
double sinc(double x);

/// c_n of the strip profile h(x); c_0 = a/d, even in n.
double fourier_coefficient(int n, const Grating& g);

/// lambda_n with V_n(z) = lambda_n V(z). lambda_0 = 1 under every convention.
double coupling_strength(int n, const Grating& g);

/// lambda_0 .. lambda_{max_offset}.
std::vector<double> coupling_strengths(const Grating& g, int max_offset);

/// Woods-Saxon absorber. `amplitude` < 0 absorbs.
struct AbsorberParams {
    double amplitude = -6.0; ///< meV
    double alpha = 2.0;
    double z_i = 0.5; ///< Angstrom
    bool enabled = true;

    void validate() const;
    bool operator==(const AbsorberParams&) const = default;
};

/// Exponent clamp for the Woods-Saxon profile.
inline constexpr double kWoodsSaxonExponentClamp = 700.0;

/// A / (1 + exp(alpha chi (z - z_i))), saturating to A or 0 outside the clamp.
/// Returns 0 when the absorber is disabled.
double woods_saxon(double z, const AbsorberParams& w, double chi);

} // namespace qreflect

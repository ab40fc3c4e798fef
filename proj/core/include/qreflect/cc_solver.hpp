#pragma once

#include "qreflect/channels.hpp"
#include "qreflect/potential.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

namespace qreflect {

/// Integration grid. Steps adapt to the local wave number; `step` is the
/// nominal step in the interaction region and the floor of the stretched tail.
struct GridSpec {
    double z_min = -13.0;        ///< Angstrom, wave function pinned to zero here
    double z_max = 2000.0;       ///< Angstrom, asymptotic matching point
    double step = 0.02;          ///< Angstrom
    double wkb_fraction = 0.025; ///< h <= wkb_fraction * local wavelength
    double tail_fraction = 0.01; ///< beyond z_bar, h <= max(step, tail_fraction * z)
    double closed_fraction = 1.0; ///< h <= closed_fraction / kappa in closed regions

    /// Every resolution knob divided by `factor` (factor 2 halves the step).
    GridSpec refined(double factor) const;
    bool operator==(const GridSpec&) const = default;
};

/// Close-coupling problem for specular incidence: channel kinematics,
/// perpendicular potential, Toeplitz coupling lambda_{|n-n'|}, absorber, grid.
class CoupledChannelProblem {
  public:
    /// `coupling` holds lambda_0 .. lambda_m with m >= 2 n_max; lambda_0 must be 1.
    CoupledChannelProblem(ChannelSet channels, SurfacePotential potential,
                          std::vector<double> coupling, AbsorberParams absorber, GridSpec grid);

    /// Flat surface: the single specular channel with unit coupling.
    static CoupledChannelProblem flat(double kz2, const SurfacePotential& potential,
                                      const AbsorberParams& absorber, const GridSpec& grid);

    /// Channels from `conditions`; couplings from `grating` (flat when absent).
    static CoupledChannelProblem make(const ScatteringConditions& conditions,
                                      const SurfacePotential& potential,
                                      const std::optional<Grating>& grating,
                                      const AbsorberParams& absorber, const GridSpec& grid);

    const ChannelSet& channels() const { return channels_; }
    const SurfacePotential& potential() const { return potential_; }
    const AbsorberParams& absorber() const { return absorber_; }
    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return channels_.size(); }

    /// Lambda matrix, entry (i, j) = lambda_{|n_i - n_j|}.
    const Eigen::MatrixXd& coupling_matrix() const { return coupling_matrix_; }
    /// Extreme eigenvalues and largest |eigenvalue| of the lambda matrix.
    double coupling_max_eigenvalue() const { return coupling_max_eig_; }
    double coupling_min_eigenvalue() const { return coupling_min_eig_; }
    double coupling_spectral_radius() const { return coupling_radius_; }

    /// Largest classically allowed local wave number on the grid, A^-1.
    double max_local_wavenumber() const;

    /// Step to take from z: the WKB rule on the classically allowed wave
    /// number, the closed-channel rule on the decay constant, the tail cap.
    double local_step(double z) const;

  private:
    ChannelSet channels_;
    SurfacePotential potential_;
    AbsorberParams absorber_;
    GridSpec grid_;
    Eigen::MatrixXd coupling_matrix_;
    double coupling_max_eig_ = 1.0;
    double coupling_min_eig_ = 1.0;
    double coupling_radius_ = 1.0;
    double max_abs_kz2_ = 0.0;
};

/// Channel potential matrix in meV: V(z) lambda + i V_WS(z) on the diagonal.
Eigen::MatrixXcd potential_matrix(double z, const CoupledChannelProblem& p);

/// Log-derivative matrix of the regular solution at z.
struct PropagationState {
    Eigen::MatrixXcd log_derivative;
    double z = 0.0;
    std::size_t sectors = 0;
};

/// Log-derivative (Johnson) propagation from z_min, where psi = 0, to z_max.
/// Throws SolverError when the nominal step under-resolves the deepest local
/// wavelength, or when the propagation produces non-finite values.
PropagationState propagate(const CoupledChannelProblem& p);

/// Column of S for unit incoming flux in the specular channel.
struct ScatteringSolution {
    std::vector<int> open_indices; ///< theory sign convention
    std::vector<std::complex<double>> s_column;
    std::vector<double> intensities; ///< |S_n0|^2, flux normalised
    double p_qr = 0.0;               ///< sum of intensities
    double unitarity_defect = 0.0;   ///< 1 - p_qr

    /// |S_n0|^2, zero for closed or absent channels.
    double intensity(int n) const;
};

/// Potential magnitude below which z_max counts as asymptotic, meV.
inline constexpr double kAsymptoticPotentialTolerance = 1e-8;

/// Matches the propagated log-derivative to free incoming/outgoing waves in
/// open channels and to growing/decaying exponentials in closed channels.
/// Closed-channel functions are scaled to 1 at z_max so nothing overflows.
ScatteringSolution extract_smatrix(const PropagationState& state, const CoupledChannelProblem& p);

/// propagate + extract_smatrix.
ScatteringSolution solve(const CoupledChannelProblem& p);

/// I_n / P^QR for every open channel, in `open_indices` order.
std::vector<double> diffraction_efficiencies(const ScatteringSolution& sol);

} // namespace qreflect

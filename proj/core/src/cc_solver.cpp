#include "qreflect/cc_solver.hpp"

#include "qreflect/errors.hpp"
#include "qreflect/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

namespace qreflect {

using cplx = std::complex<double>;

GridSpec GridSpec::refined(double factor) const {
    GridSpec g = *this;
    g.step /= factor;
    g.wkb_fraction /= factor;
    g.tail_fraction /= factor;
    g.closed_fraction /= factor;
    return g;
}

CoupledChannelProblem::CoupledChannelProblem(ChannelSet channels, SurfacePotential potential,
                                             std::vector<double> coupling,
                                             AbsorberParams absorber, GridSpec grid)
    : channels_(std::move(channels)), potential_(potential), absorber_(absorber), grid_(grid) {
    const auto n = channels_.size();
    if (n == 0) throw DomainError("coupled-channel problem: empty channel set");
    if (channels_.specular_position() == n) {
        throw DomainError("coupled-channel problem: channel set lacks the specular channel");
    }
    if (!(grid_.z_min < 0.0 && potential_.z_bar > 0.0 && potential_.z_bar < grid_.z_max)) {
        throw DomainError("coupled-channel problem: need z_min < 0 < z_bar < z_max");
    }
    if (!(grid_.step > 0.0 && grid_.wkb_fraction > 0.0 && grid_.tail_fraction >= 0.0 &&
          grid_.closed_fraction > 0.0)) {
        throw DomainError("coupled-channel problem: grid resolution parameters must be positive");
    }
    absorber_.validate();

    int max_offset = 0;
    for (int a : channels_.indices) {
        for (int b : channels_.indices) max_offset = std::max(max_offset, std::abs(a - b));
    }
    if (coupling.size() < static_cast<std::size_t>(max_offset) + 1) {
        throw DomainError("coupled-channel problem: coupling table shorter than channel span");
    }
    if (coupling.front() != 1.0) {
        throw DomainError("coupled-channel problem: lambda_0 must be 1");
    }

    coupling_matrix_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto offset = std::abs(channels_.indices[i] - channels_.indices[j]);
            coupling_matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                coupling[static_cast<std::size_t>(offset)];
        }
    }
    if (n > 1) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(coupling_matrix_,
                                                           Eigen::EigenvaluesOnly);
        coupling_max_eig_ = eig.eigenvalues().maxCoeff();
        coupling_min_eig_ = eig.eigenvalues().minCoeff();
        coupling_radius_ = eig.eigenvalues().cwiseAbs().maxCoeff();
    }
    for (double k2 : channels_.kz2) max_abs_kz2_ = std::max(max_abs_kz2_, std::abs(k2));
}

CoupledChannelProblem CoupledChannelProblem::flat(double kz2, const SurfacePotential& potential,
                                                  const AbsorberParams& absorber,
                                                  const GridSpec& grid) {
    ChannelSet set{{0}, {kz2}, {kz2 > 0.0}};
    return {std::move(set), potential, {1.0}, absorber, grid};
}

CoupledChannelProblem CoupledChannelProblem::make(const ScatteringConditions& conditions,
                                                  const SurfacePotential& potential,
                                                  const std::optional<Grating>& grating,
                                                  const AbsorberParams& absorber,
                                                  const GridSpec& grid) {
    if (!grating) {
        return flat(kz_squared(0, conditions), potential, absorber, grid);
    }
    grating->validate();
    auto set = build_channel_set(conditions, grating->n_max);
    return {std::move(set), potential, coupling_strengths(*grating, 2 * grating->n_max), absorber,
            grid};
}

double CoupledChannelProblem::max_local_wavenumber() const {
    double k2 = 0.0;
    for (double v : channels_.kz2) k2 = std::max(k2, v);
    k2 += std::max(coupling_max_eig_, 0.0) * potential_.d_well / units::kinetic_prefactor();
    return std::sqrt(k2);
}

double CoupledChannelProblem::local_step(double z) const {
    const double c = units::kinetic_prefactor();
    const double v = potential_.value(z);
    const double w = std::abs(woods_saxon(z, absorber_, potential_.chi));
    // eigenvalues of -v lambda / c span [lo, hi]
    const double lo = -std::max(v * coupling_max_eig_, v * coupling_min_eig_) / c;
    const double hi = -std::min(v * coupling_max_eig_, v * coupling_min_eig_) / c;
    const double q2 = max_abs_kz2_ + std::max(hi, 0.0) + w / c;
    const double kappa2 = std::max(-lo - max_abs_kz2_, 0.0);
    const double two_pi = 2.0 * std::numbers::pi;
    double h = q2 > 0.0 ? grid_.wkb_fraction * two_pi / std::sqrt(q2)
                        : std::numeric_limits<double>::infinity();
    if (kappa2 > 0.0) h = std::min(h, grid_.closed_fraction / std::sqrt(kappa2));
    const double cap =
        z >= potential_.z_bar ? std::max(grid_.step, grid_.tail_fraction * z) : grid_.step;
    return std::min(h, cap);
}

Eigen::MatrixXcd potential_matrix(double z, const CoupledChannelProblem& p) {
    const double v = p.potential().value(z);
    const double w = woods_saxon(z, p.absorber(), p.potential().chi);
    Eigen::MatrixXcd m = (v * p.coupling_matrix()).cast<cplx>();
    m.diagonal().array() += cplx(0.0, w);
    return m;
}

namespace {

[[noreturn]] void throw_non_finite(double z) {
    std::ostringstream msg;
    msg << "propagate: non-finite log-derivative at z = " << z << " Angstrom";
    throw SolverError(msg.str());
}

void check_resolution(const CoupledChannelProblem& p) {
    const double k_max = p.max_local_wavenumber();
    if (k_max <= 0.0) return;
    const double allowed = p.grid().wkb_fraction * 2.0 * std::numbers::pi / k_max;
    if (p.grid().step > allowed * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "propagate: step " << p.grid().step << " A is too coarse; the shortest local "
            << "wavelength " << 2.0 * std::numbers::pi / k_max << " A needs h <= " << allowed;
        throw SolverError(msg.str());
    }
}

// Scalar specialisation of the matrix recursion below.
PropagationState propagate_single(const CoupledChannelProblem& p) {
    const double c = units::kinetic_prefactor();
    const double kz2 = p.channels().kz2.front();
    const double chi = p.potential().chi;
    auto w_of = [&](double z) {
        const double v = p.potential().value(z);
        const double ws = woods_saxon(z, p.absorber(), chi);
        return cplx(kz2 - v / c, -ws / c);
    };

    const double z_max = p.grid().z_max;
    double z = p.grid().z_min;
    cplx y{};
    cplx w_start = w_of(z);
    bool pinned = true;
    std::size_t sectors = 0;
    while (z < z_max) {
        double h = std::min(p.local_step(z), z_max - z);
        if (z_max - (z + h) < 1e-9) h = z_max - z;
        const double hh = 0.5 * h;
        const cplx w_mid = w_of(z + hh);
        const cplx w_end = w_of(z + h);
        const cplx u_mid = w_mid / (1.0 + hh * hh / 6.0 * w_mid);
        if (pinned) {
            y = 1.0 / hh; // limit of y / (1 + hh y) for psi(z_min) = 0
            pinned = false;
        } else {
            y -= hh / 3.0 * w_start;
            y = y / (1.0 + hh * y);
        }
        y -= hh / 3.0 * 4.0 * u_mid;
        y = y / (1.0 + hh * y);
        y -= hh / 3.0 * w_end;
        z += h;
        w_start = w_end;
        ++sectors;
        if (!std::isfinite(y.real()) || !std::isfinite(y.imag())) throw_non_finite(z);
    }
    PropagationState state;
    state.log_derivative = Eigen::MatrixXcd::Constant(1, 1, y);
    state.z = z;
    state.sectors = sectors;
    return state;
}

PropagationState propagate_coupled(const CoupledChannelProblem& p) {
    const double c = units::kinetic_prefactor();
    const auto n = static_cast<Eigen::Index>(p.size());
    const double chi = p.potential().chi;

    Eigen::VectorXcd kz2(n);
    for (Eigen::Index i = 0; i < n; ++i) kz2(i) = p.channels().kz2[static_cast<std::size_t>(i)];
    const Eigen::MatrixXcd lambda = p.coupling_matrix().cast<cplx>();
    const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(n, n);

    auto w_of = [&](double z) {
        const double v = p.potential().value(z);
        const double ws = woods_saxon(z, p.absorber(), chi);
        Eigen::MatrixXcd w = (-v / c) * lambda;
        w.diagonal() += kz2;
        w.diagonal().array() -= cplx(0.0, ws / c);
        return w;
    };
    // y <- (I + h y)^{-1} y
    auto invariant_step = [&](Eigen::MatrixXcd& y, double h) {
        Eigen::MatrixXcd a = identity + h * y;
        y = a.partialPivLu().solve(y);
    };

    const double z_max = p.grid().z_max;
    double z = p.grid().z_min;
    Eigen::MatrixXcd y(n, n);
    Eigen::MatrixXcd w_start = w_of(z);
    bool pinned = true;
    std::size_t sectors = 0;
    while (z < z_max) {
        double h = std::min(p.local_step(z), z_max - z);
        if (z_max - (z + h) < 1e-9) h = z_max - z;
        const double hh = 0.5 * h;
        const Eigen::MatrixXcd w_mid = w_of(z + hh);
        Eigen::MatrixXcd w_end = w_of(z + h);
        const Eigen::MatrixXcd u_mid =
            (identity + (hh * hh / 6.0) * w_mid).partialPivLu().solve(w_mid);
        if (pinned) {
            y = identity / hh;
            pinned = false;
        } else {
            y -= (hh / 3.0) * w_start;
            invariant_step(y, hh);
        }
        y -= (hh / 3.0 * 4.0) * u_mid;
        invariant_step(y, hh);
        y -= (hh / 3.0) * w_end;
        z += h;
        w_start = std::move(w_end);
        ++sectors;
        if (!y.allFinite()) throw_non_finite(z);
    }
    // Johnson's recursion preserves symmetry only to rounding; restore it.
    PropagationState state;
    state.log_derivative = 0.5 * (y + y.transpose());
    state.z = z;
    state.sectors = sectors;
    return state;
}

} // namespace

PropagationState propagate(const CoupledChannelProblem& p) {
    check_resolution(p);
    return p.size() == 1 ? propagate_single(p) : propagate_coupled(p);
}

ScatteringSolution extract_smatrix(const PropagationState& state, const CoupledChannelProblem& p) {
    const auto& ch = p.channels();
    const auto n = static_cast<Eigen::Index>(ch.size());
    if (state.log_derivative.rows() != n || state.log_derivative.cols() != n) {
        throw SolverError("extract_smatrix: log-derivative size does not match channel set");
    }
    const double z = state.z;
    const double residual = potential_matrix(z, p).cwiseAbs().maxCoeff();
    if (!(residual < kAsymptoticPotentialTolerance)) {
        std::ostringstream msg;
        msg << "extract_smatrix: z_max = " << z << " A is not asymptotic, potential entry "
            << residual << " meV exceeds " << kAsymptoticPotentialTolerance << " meV";
        throw SolverError(msg.str());
    }

    // Incoming/outgoing functions and derivatives, diagonal.
    Eigen::VectorXcd in(n), in_d(n), out(n), out_d(n);
    const cplx i1(0.0, 1.0);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double k2 = ch.kz2[static_cast<std::size_t>(j)];
        if (k2 > 0.0) {
            const double k = std::sqrt(k2);
            const double norm = 1.0 / std::sqrt(k);
            const cplx phase = std::exp(i1 * (k * z));
            in(j) = norm / phase;
            in_d(j) = -i1 * k * in(j);
            out(j) = norm * phase;
            out_d(j) = i1 * k * out(j);
        } else if (k2 < 0.0) {
            const double kappa = std::sqrt(-k2);
            in(j) = 1.0; // e^{+kappa (z - z_max)}
            in_d(j) = kappa;
            out(j) = 1.0; // e^{-kappa (z - z_max)}
            out_d(j) = -kappa;
        } else {
            in(j) = 1.0; // 1 + (z - z_max)
            in_d(j) = 1.0;
            out(j) = 1.0;
            out_d(j) = 0.0;
        }
    }

    const auto& y = state.log_derivative;
    Eigen::MatrixXcd lhs = y * out.asDiagonal();
    lhs.diagonal() -= out_d;
    Eigen::MatrixXcd rhs = y * in.asDiagonal();
    rhs.diagonal() -= in_d;
    const auto spec = static_cast<Eigen::Index>(ch.specular_position());
    const Eigen::VectorXcd column = lhs.partialPivLu().solve(rhs.col(spec));
    if (!column.allFinite()) throw SolverError("extract_smatrix: singular matching system");

    ScatteringSolution sol;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!ch.open[static_cast<std::size_t>(j)]) continue;
        sol.open_indices.push_back(ch.indices[static_cast<std::size_t>(j)]);
        sol.s_column.push_back(column(j));
        sol.intensities.push_back(std::norm(column(j)));
    }
    for (double v : sol.intensities) sol.p_qr += v;
    sol.unitarity_defect = 1.0 - sol.p_qr;
    return sol;
}

ScatteringSolution solve(const CoupledChannelProblem& p) { return extract_smatrix(propagate(p), p); }

double ScatteringSolution::intensity(int n) const {
    for (std::size_t i = 0; i < open_indices.size(); ++i) {
        if (open_indices[i] == n) return intensities[i];
    }
    return 0.0;
}

std::vector<double> diffraction_efficiencies(const ScatteringSolution& sol) {
    if (!(sol.p_qr >= 1e-12)) {
        throw SolverError("diffraction_efficiencies: no reflected flux to normalise (P^QR < 1e-12)");
    }
    std::vector<double> out;
    out.reserve(sol.intensities.size());
    for (double v : sol.intensities) out.push_back(v / sol.p_qr);
    return out;
}

} // namespace qreflect

#include "qreflect/potential.hpp"

#include "qreflect/errors.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <string>

namespace qreflect {

namespace {

// Logarithmic-derivative mismatch V_M'/V_M - V_C'/V_C. Independent of D and C4.
double log_derivative_mismatch(double z, double chi, double l) {
    const double e = std::exp(-chi * z);
    const double morse = 2.0 * chi * (1.0 - e) / (e - 2.0);
    const double casimir = -(1.0 / (l + z) + 3.0 / z);
    return morse - casimir;
}

double bisect(double lo, double hi, double f_lo, double chi, double l) {
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = log_derivative_mismatch(mid, chi, l);
        if (f_mid == 0.0) return mid;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

MatchingSolution solve_matching(double chi, double c3, double l) {
    if (!(chi > 0.0) || !(c3 > 0.0) || !(l > 0.0)) {
        throw DomainError("solve_matching: chi, c3 and l must all be positive");
    }

    std::vector<double> roots;
    const double step = (kMatchingBracketHigh - kMatchingBracketLow) / (kMatchingScanPoints - 1);
    double z_prev = kMatchingBracketLow;
    double f_prev = log_derivative_mismatch(z_prev, chi, l);
    for (int i = 1; i < kMatchingScanPoints; ++i) {
        const double z = kMatchingBracketLow + i * step;
        const double f = log_derivative_mismatch(z, chi, l);
        if (f_prev == 0.0) {
            roots.push_back(z_prev);
        } else if ((f < 0.0) != (f_prev < 0.0) && f != 0.0) {
            roots.push_back(bisect(z_prev, z, f_prev, chi, l));
        }
        z_prev = z;
        f_prev = f;
    }
    if (f_prev == 0.0) roots.push_back(z_prev);

    if (roots.empty()) {
        std::ostringstream msg;
        msg << "solve_matching: no matching point in the bracket (" << kMatchingBracketLow << ", "
            << kMatchingBracketHigh << ") Angstrom for chi=" << chi << ", l=" << l;
        throw MatchingError(msg.str());
    }
    if (roots.size() > 1) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "solve_matching: " << roots.size() << " candidate matching points:";
        for (double r : roots) msg << ' ' << r;
        throw MatchingError(msg.str());
    }

    const double z_bar = roots.front();
    const double e = std::exp(-chi * z_bar);
    const double casimir = -c3 * l / ((l + z_bar) * z_bar * z_bar * z_bar);
    return {casimir / (e * e - 2.0 * e), z_bar};
}

SurfacePotential SurfacePotential::from_matching(double chi, double c3, double l) {
    const auto m = solve_matching(chi, c3, l);
    SurfacePotential p{chi, c3, l, c3 * l, m.d_well, m.z_bar};

    const double value_residual = std::abs(p.morse(p.z_bar) - p.casimir(p.z_bar));
    const double slope_residual =
        std::abs(p.morse_derivative(p.z_bar) - p.casimir_derivative(p.z_bar));
    if (value_residual > 1e-10 || slope_residual > 1e-10) {
        std::ostringstream msg;
        msg << "matching residuals too large: value " << value_residual << " meV, slope "
            << slope_residual << " meV/A";
        throw MatchingError(msg.str());
    }
    return p;
}

double SurfacePotential::morse(double z) const {
    const double e = std::exp(-chi * z);
    return d_well * (e * e - 2.0 * e);
}

double SurfacePotential::morse_derivative(double z) const {
    const double e = std::exp(-chi * z);
    return 2.0 * chi * d_well * (e - e * e);
}

double SurfacePotential::casimir(double z) const { return -c4 / ((l + z) * z * z * z); }

double SurfacePotential::casimir_derivative(double z) const {
    return -casimir(z) * (1.0 / (l + z) + 3.0 / z);
}

const char* to_string(CouplingConvention c) {
    switch (c) {
    case CouplingConvention::fourier: return "fourier";
    case CouplingConvention::normalized: return "normalized";
    case CouplingConvention::doubled_sinc: return "doubled_sinc";
    }
    return "normalized";
}

CouplingConvention coupling_convention_from_string(const char* name) {
    if (std::strcmp(name, "fourier") == 0) return CouplingConvention::fourier;
    if (std::strcmp(name, "normalized") == 0) return CouplingConvention::normalized;
    if (std::strcmp(name, "doubled_sinc") == 0) return CouplingConvention::doubled_sinc;
    throw DomainError(std::string("unknown coupling convention '") + name +
                      "' (expected fourier, normalized or doubled_sinc)");
}

void Grating::validate() const {
    if (!(a > 0.0) || !(a < d)) {
        throw DomainError("grating: need 0 < a < d, got a=" + std::to_string(a) +
                          ", d=" + std::to_string(d));
    }
    if (n_max < 0) throw DomainError("grating: n_max must be >= 0");
}

double sinc(double x) {
    if (x == 0.0) return 1.0;
    if (x == std::nearbyint(x)) return 0.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

double fourier_coefficient(int n, const Grating& g) {
    const double f = g.fill_fraction();
    return f * sinc(n * f);
}

double coupling_strength(int n, const Grating& g) {
    if (n == 0) return 1.0;
    const double s = sinc(n * g.fill_fraction());
    switch (g.coupling) {
    case CouplingConvention::fourier: return g.fill_fraction() * s;
    case CouplingConvention::normalized: return s;
    case CouplingConvention::doubled_sinc: return 2.0 * s;
    }
    return s;
}

std::vector<double> coupling_strengths(const Grating& g, int max_offset) {
    std::vector<double> out(static_cast<std::size_t>(max_offset) + 1);
    for (int m = 0; m <= max_offset; ++m) out[static_cast<std::size_t>(m)] = coupling_strength(m, g);
    return out;
}

void AbsorberParams::validate() const {
    if (!enabled) return;
    if (!(alpha > 0.0)) throw DomainError("absorber: alpha must be positive");
    if (!std::isfinite(amplitude) || !std::isfinite(z_i)) {
        throw DomainError("absorber: amplitude and z_i must be finite");
    }
}

double woods_saxon(double z, const AbsorberParams& w, double chi) {
    if (!w.enabled) return 0.0;
    const double x = w.alpha * chi * (z - w.z_i);
    if (x >= kWoodsSaxonExponentClamp) return 0.0;
    if (x <= -kWoodsSaxonExponentClamp) return w.amplitude;
    return w.amplitude / (1.0 + std::exp(x));
}

} // namespace qreflect

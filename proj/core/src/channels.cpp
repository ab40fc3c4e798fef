#include "qreflect/channels.hpp"

#include "qreflect/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qreflect {

double grazing_to_normal(double theta_grazing) { return 0.5 * std::numbers::pi - theta_grazing; }

double normal_to_grazing(double theta_normal) { return 0.5 * std::numbers::pi - theta_normal; }

ScatteringConditions::ScatteringConditions(double k_i, double theta_grazing,
                                           std::optional<double> d)
    : k_i_(k_i), theta_grazing_(theta_grazing), d_period_(d) {
    if (!(k_i > 0.0)) throw DomainError("scattering conditions: k_i must be positive");
    // theta_normal in [0, pi/2)  <=>  theta_grazing in (0, pi/2]
    if (!(theta_grazing > 0.0) || theta_grazing > 0.5 * std::numbers::pi) {
        throw DomainError("scattering conditions: incidence angle out of range, theta_grazing=" +
                          std::to_string(theta_grazing));
    }
    if (d && !(*d > 0.0)) throw DomainError("scattering conditions: period must be positive");
}

ScatteringConditions ScatteringConditions::from_grazing(double k_i, double theta_grazing,
                                                        std::optional<double> d_period) {
    return {k_i, theta_grazing, d_period};
}

ScatteringConditions ScatteringConditions::from_normal(double k_i, double theta_normal,
                                                       std::optional<double> d_period) {
    return {k_i, normal_to_grazing(theta_normal), d_period};
}

double ScatteringConditions::reciprocal_vector() const {
    return d_period_ ? 2.0 * std::numbers::pi / *d_period_ : 0.0;
}

double parallel_momentum(int n, const ScatteringConditions& c) {
    return c.k_i() * std::cos(c.theta_grazing()) + n * c.reciprocal_vector();
}

double kz_squared(int n, const ScatteringConditions& c) {
    if (n != 0 && !c.d_period()) {
        throw KinematicsError("kz_squared: diffraction order " + std::to_string(n) +
                              " requested on a flat surface");
    }
    const double k = c.k_i();
    const double tg = c.theta_grazing();
    const double shift = n * c.reciprocal_vector();
    // k^2 - p^2 = (k - p)(k + p) with k - p = 2 k sin^2(tg/2) - shift.
    const double s = std::sin(0.5 * tg);
    const double minus = 2.0 * k * s * s - shift;
    const double plus = k * (1.0 + std::cos(tg)) + shift;
    return minus * plus;
}

std::size_t ChannelSet::specular_position() const {
    const auto it = std::find(indices.begin(), indices.end(), 0);
    return static_cast<std::size_t>(it - indices.begin());
}

std::size_t ChannelSet::open_count() const {
    return static_cast<std::size_t>(std::count(open.begin(), open.end(), true));
}

ChannelSet build_channel_set(const ScatteringConditions& c, int n_max) {
    if (n_max < 0) throw DomainError("build_channel_set: n_max must be >= 0");
    const int n = c.d_period() ? n_max : 0;
    ChannelSet set;
    set.indices.reserve(static_cast<std::size_t>(2 * n + 1));
    for (int i = -n; i <= n; ++i) {
        const double kz2 = kz_squared(i, c);
        set.indices.push_back(i);
        set.kz2.push_back(kz2);
        set.open.push_back(kz2 > 0.0);
    }
    return set;
}

double bragg_angle(int n, const ScatteringConditions& c) {
    if (n == 0) return c.theta_grazing();
    if (!c.d_period()) {
        throw KinematicsError("bragg_angle: order " + std::to_string(n) + " on a flat surface");
    }
    const double cos_out = std::cos(c.theta_grazing()) - n * c.reciprocal_vector() / c.k_i();
    if (std::abs(cos_out) > 1.0) {
        throw KinematicsError("bragg_angle: order " + std::to_string(n) +
                              " is evanescent (closed channel)");
    }
    // Small angles lose precision through arccos; use the perpendicular
    // momentum of the matching theory channel instead.
    const double kz2 = kz_squared(theory_index(n), c);
    if (kz2 <= 0.0) {
        throw KinematicsError("bragg_angle: order " + std::to_string(n) +
                              " is evanescent (closed channel)");
    }
    return std::atan2(std::sqrt(kz2), cos_out * c.k_i());
}

} // namespace qreflect

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace qreflect {

/// Grazing angle (from the surface plane) to the theory angle measured from
/// the surface normal, and back. The only place the two conventions meet.
double grazing_to_normal(double theta_grazing);
double normal_to_grazing(double theta_normal);

/// Incident kinematics. The grazing angle is stored; the normal-convention
/// angle is derived so that small grazing angles keep full precision.
class ScatteringConditions {
  public:
    static ScatteringConditions from_grazing(double k_i, double theta_grazing,
                                             std::optional<double> d_period = std::nullopt);
    static ScatteringConditions from_normal(double k_i, double theta_normal,
                                            std::optional<double> d_period = std::nullopt);

    double k_i() const { return k_i_; }
    double theta_grazing() const { return theta_grazing_; }
    double theta_normal() const { return normal_to_grazing(theta_grazing_); }
    const std::optional<double>& d_period() const { return d_period_; }

    /// 2 pi / d, or 0 for a flat surface.
    double reciprocal_vector() const;

  private:
    ScatteringConditions(double k_i, double theta_grazing, std::optional<double> d);

    double k_i_;
    double theta_grazing_;
    std::optional<double> d_period_;
};

/// k_{n,z}^2 = k_i^2 - (k_i sin(theta_normal) + 2 pi n / d)^2 in Angstrom^-2.
/// Evaluated in factored form to avoid cancellation at grazing incidence.
/// Throws KinematicsError for n != 0 on a flat surface.
double kz_squared(int n, const ScatteringConditions& c);

/// Parallel momentum of channel n, k_i sin(theta_normal) + 2 pi n / d.
double parallel_momentum(int n, const ScatteringConditions& c);

/// Diffraction channel basis n in [-n_max, n_max] (theory sign convention).
struct ChannelSet {
    std::vector<int> indices;
    std::vector<double> kz2;
    std::vector<bool> open;

    std::size_t size() const { return indices.size(); }
    std::size_t specular_position() const;
    std::size_t open_count() const;
};

/// Flat surfaces (no period) always produce the single channel {0}.
ChannelSet build_channel_set(const ScatteringConditions& c, int n_max);

/// Experimental order for a theory channel index. Positive theory orders are
/// negative experimental ones.
constexpr int experimental_order(int theory_index) { return -theory_index; }
constexpr int theory_index(int experimental) { return -experimental; }

/// Outgoing grazing angle of experimental order n:
/// cos(theta_n) = cos(theta_i) - 2 pi n / (d k_i). Throws KinematicsError for
/// an evanescent order.
double bragg_angle(int n, const ScatteringConditions& c);

} // namespace qreflect

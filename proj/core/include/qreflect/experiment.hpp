#pragma once

#include "qreflect/cc_solver.hpp"
#include "qreflect/surfaces.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qreflect {

/// Supersonic He source at stagnation temperature t0 (K): E_i = (5/2) k_B t0.
struct BeamSource {
    double t0;

    /// Throws DomainError for a non-positive temperature.
    static BeamSource from_temperature(double t0);

    double energy() const; ///< meV
    double k_i() const;    ///< Angstrom^-1
};

/// Incident wave vector sqrt(5 m k_B t0) / hbar, nm^-1.
double wavevector_from_temperature(double t0);

/// Perpendicular wave vector k sin(theta_grazing), nm^-1.
double k_perp(double t0, double theta_grazing);

/// Grazing angle (rad) giving k_perp_nm at temperature t0.
double grazing_angle_for_k_perp(double t0, double k_perp_nm);

/// Upper end of the grazing angles the scan runner accepts, rad.
inline constexpr double kMaxScanAngle = 25.0e-3;

/// `count` grazing angles from start to stop (mrad in, rad out), log or linear.
std::vector<double> angle_grid(double start_mrad, double stop_mrad, int count, bool logarithmic);

struct ScanRecord {
    double theta_grazing = 0.0; ///< rad
    double k_perp = 0.0;        ///< nm^-1
    double p_qr = 0.0;
    double unitarity_defect = 0.0;
    std::vector<int> open_indices; ///< theory sign convention
    std::vector<double> intensities;

    double intensity(int theory_n) const;
};

struct ScanResult {
    std::string surface_id;
    BeamSource beam{0.0};
    std::vector<ScanRecord> records; ///< ordered by angle

    /// p_qr never rises by more than `tol` as k_perp grows.
    bool is_monotone_nonincreasing(double tol = 1e-6) const;
};

/// One close-coupling solution for the given beam and grazing angle.
ScatteringSolution solve_point(const Surface& surface, const BeamSource& beam,
                               double theta_grazing, const AbsorberParams& absorber,
                               const GridSpec& grid = {});

/// Worker count: $QREFLECT_THREADS if set, else hardware concurrency.
unsigned scan_worker_count();

/// Solves every angle (strictly increasing, within (0, 25 mrad]). Points run
/// concurrently on up to `threads` workers (0 = scan_worker_count()); records
/// are assembled by angle so the output does not depend on scheduling. A
/// failing point aborts the scan with a SolverError naming the angle.
ScanResult run_scan(const Surface& surface, const BeamSource& beam, std::span<const double> angles,
                    const AbsorberParams& absorber, const GridSpec& grid = {},
                    unsigned threads = 0);

/// User-supplied digitised measurement.
struct ExperimentalCurve {
    std::vector<double> k_perp; ///< nm^-1, strictly increasing
    std::vector<double> probability;
    std::string label;

    /// Throws DomainError unless probabilities lie in [0, 1] and k_perp increases.
    void validate() const;
};

/// Reads `header` then `k_perp_nm_inv,probability` rows; '#' lines are skipped.
ExperimentalCurve parse_experimental_csv(const std::string& text, const std::string& label);
ExperimentalCurve load_experimental_csv(const std::string& path);

/// Monotone piecewise-cubic (PCHIP) interpolant of a sampled curve; linear
/// when fewer than four nodes are available.
class MonotoneCurve {
  public:
    MonotoneCurve(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }

  private:
    double x_min_ = 0.0;
    double x_max_ = 0.0;
    std::function<double(double)> eval_;
};

struct MatchedPoint {
    double k_perp;
    double p_exp;
    double p_theo;
};

struct SigmaResult {
    double sigma = 0.0;
    std::vector<MatchedPoint> points;
};

/// sqrt( sum |(P_exp - P_theo) / P_exp|^2 / (N (N - 1)) ). Throws DomainError
/// for N < 2 or a non-positive experimental probability.
double sigma_metric(std::span<const double> p_exp, std::span<const double> p_theo);

/// Interpolates the theory curve onto the experimental nodes inside its
/// k_perp range, then evaluates sigma over those nodes.
SigmaResult sigma_metric(const ExperimentalCurve& exp, std::span<const double> theory_k_perp,
                         std::span<const double> theory_p);
SigmaResult sigma_metric(const ExperimentalCurve& exp, const ScanResult& theo);

struct ThresholdFit {
    double intercept = 0.0;
    double slope = 0.0;        ///< dP / dk_perp, nm
    double b_nm = 0.0;         ///< -slope / 2
    double r_squared = 0.0;
    double rms_residual = 0.0;
    std::size_t points = 0;
};

/// Least-squares P = intercept - 2 b k over the given points.
ThresholdFit fit_threshold_line(std::span<const double> k_perp, std::span<const double> p);

/// Fit over scan points with 0 < k_perp <= cutoff_nm. Needs at least 5 points.
ThresholdFit threshold_fit(const ScanResult& scan, double cutoff_nm);

/// |A| x {0.5, 1, 2} crossed with alpha in {1, 2, 4}; `base` comes first.
std::vector<AbsorberParams> default_absorber_variants(const AbsorberParams& base);

struct AbsorberIndependence {
    std::vector<double> p_qr;       ///< one per variant
    double max_relative_spread = 0; ///< max |P_v - P_0| / P_0
    bool category_warning = false;  ///< a variant had the absorber disabled
};

/// Solves one (beam, angle) point under each variant; variants[0] is the
/// reference. Needs at least two variants.
AbsorberIndependence absorber_independence_report(const Surface& surface, const BeamSource& beam,
                                                  double theta_grazing,
                                                  std::span<const AbsorberParams> variants,
                                                  const GridSpec& grid = {});

/// P^QR of a scan interpolated at k_perp; nullopt outside the scanned range.
std::optional<double> interpolate_p_qr(const ScanResult& scan, double k_perp_nm);

/// (max - min) / max of P^QR at k_perp over the scans covering it; nullopt
/// when fewer than two scans reach k_perp.
std::optional<double> temperature_spread(std::span<const ScanResult> scans, double k_perp_nm);

} // namespace qreflect

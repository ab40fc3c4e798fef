#include "qreflect/experiment.hpp"

#include "qreflect/errors.hpp"
#include "qreflect/units.hpp"

// boost 1.74 pchip calls isnan unqualified
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

namespace qreflect {

BeamSource BeamSource::from_temperature(double t0) {
    if (!(t0 > 0.0) || !std::isfinite(t0)) {
        throw DomainError("beam: stagnation temperature must be positive, got " +
                          std::to_string(t0));
    }
    return BeamSource{t0};
}

double BeamSource::energy() const { return 2.5 * units::constants().k_boltzmann * t0; }

double BeamSource::k_i() const { return std::sqrt(energy() / units::kinetic_prefactor()); }

double wavevector_from_temperature(double t0) {
    return units::to_per_nm(BeamSource::from_temperature(t0).k_i());
}

double k_perp(double t0, double theta_grazing) {
    if (!(theta_grazing > 0.0) || !(theta_grazing < 0.5 * M_PI)) {
        throw DomainError("k_perp: grazing angle must lie in (0, pi/2), got " +
                          std::to_string(theta_grazing));
    }
    return wavevector_from_temperature(t0) * std::sin(theta_grazing);
}

double grazing_angle_for_k_perp(double t0, double k_perp_nm) {
    const double k = wavevector_from_temperature(t0);
    if (!(k_perp_nm > 0.0) || !(k_perp_nm < k)) {
        throw DomainError("grazing_angle_for_k_perp: k_perp outside (0, k)");
    }
    return std::asin(k_perp_nm / k);
}

std::vector<double> angle_grid(double start_mrad, double stop_mrad, int count, bool logarithmic) {
    if (count < 1) throw DomainError("angle grid: count must be >= 1");
    if (!(start_mrad > 0.0) || (count > 1 && !(stop_mrad > start_mrad))) {
        throw DomainError("angle grid: need 0 < start < stop");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    if (count == 1) {
        out.push_back(units::mrad_to_rad(start_mrad));
        return out;
    }
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        double mrad = logarithmic ? start_mrad * std::pow(stop_mrad / start_mrad, t)
                                  : start_mrad + t * (stop_mrad - start_mrad);
        if (i == count - 1) mrad = stop_mrad;
        out.push_back(units::mrad_to_rad(mrad));
    }
    return out;
}

double ScanRecord::intensity(int theory_n) const {
    for (std::size_t i = 0; i < open_indices.size(); ++i) {
        if (open_indices[i] == theory_n) return intensities[i];
    }
    return 0.0;
}

bool ScanResult::is_monotone_nonincreasing(double tol) const {
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].p_qr > records[i - 1].p_qr + tol) return false;
    }
    return true;
}

ScatteringSolution solve_point(const Surface& surface, const BeamSource& beam,
                               double theta_grazing, const AbsorberParams& absorber,
                               const GridSpec& grid) {
    std::optional<double> period;
    if (surface.grating) period = surface.grating->d;
    const auto cond = ScatteringConditions::from_grazing(beam.k_i(), theta_grazing, period);
    const auto problem =
        CoupledChannelProblem::make(cond, surface.potential, surface.grating, absorber, grid);
    return solve(problem);
}

unsigned scan_worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("QREFLECT_THREADS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) n = static_cast<unsigned>(v);
    }
    return n;
}

ScanResult run_scan(const Surface& surface, const BeamSource& beam, std::span<const double> angles,
                    const AbsorberParams& absorber, const GridSpec& grid, unsigned threads) {
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double a = angles[i];
        if (!(a > 0.0) || a > kMaxScanAngle * (1.0 + 1e-12)) {
            throw DomainError("run_scan: angle " + std::to_string(units::rad_to_mrad(a)) +
                              " mrad outside (0, 25] mrad");
        }
        if (i > 0 && !(a > angles[i - 1])) {
            throw DomainError("run_scan: angles must be strictly increasing");
        }
    }

    ScanResult result{surface.id, beam, std::vector<ScanRecord>(angles.size())};
    std::vector<std::exception_ptr> errors(angles.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < angles.size(); i = next++) {
            try {
                const auto sol = solve_point(surface, beam, angles[i], absorber, grid);
                auto& rec = result.records[i];
                rec.theta_grazing = angles[i];
                rec.k_perp = k_perp(beam.t0, angles[i]);
                rec.p_qr = sol.p_qr;
                rec.unitarity_defect = sol.unitarity_defect;
                rec.open_indices = sol.open_indices;
                rec.intensities = sol.intensities;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const unsigned n_workers = std::min<std::size_t>(
        threads ? threads : scan_worker_count(), std::max<std::size_t>(angles.size(), 1));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    }

    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        std::string what = "unknown error";
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        std::ostringstream msg;
        msg << "scan of '" << surface.id << "' at T0 = " << beam.t0 << " K failed at theta = "
            << units::rad_to_mrad(angles[i]) << " mrad: " << what;
        throw SolverError(msg.str());
    }
    return result;
}

void ExperimentalCurve::validate() const {
    if (k_perp.size() != probability.size()) {
        throw DomainError("experimental curve: column lengths differ");
    }
    for (std::size_t i = 0; i < k_perp.size(); ++i) {
        if (!(probability[i] >= 0.0 && probability[i] <= 1.0)) {
            throw DomainError("experimental curve: probability outside [0, 1] at row " +
                              std::to_string(i + 1));
        }
        if (i > 0 && !(k_perp[i] > k_perp[i - 1])) {
            throw DomainError("experimental curve: k_perp must be strictly increasing");
        }
    }
}

ExperimentalCurve parse_experimental_csv(const std::string& text, const std::string& label) {
    ExperimentalCurve curve;
    curve.label = label;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError(label + ":" + std::to_string(line_no) + ": expected two columns");
        }
        try {
            std::size_t used = 0;
            const double k = std::stod(line.substr(0, comma), &used);
            const double p = std::stod(line.substr(comma + 1));
            curve.k_perp.push_back(k);
            curve.probability.push_back(p);
        } catch (const std::exception&) {
            throw ParseError(label + ":" + std::to_string(line_no) + ": not a number: '" + line +
                             "'");
        }
    }
    if (!header_seen) throw ParseError(label + ": missing header line");
    curve.validate();
    return curve;
}

ExperimentalCurve load_experimental_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experimental_csv(buf.str(), path);
}

MonotoneCurve::MonotoneCurve(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw DomainError("monotone interpolation needs at least two (x, y) pairs");
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) throw DomainError("monotone interpolation: x must increase");
    }
    x_min_ = x.front();
    x_max_ = x.back();
    if (x.size() >= 4) {
        using boost::math::interpolators::pchip;
        auto spline = std::make_shared<pchip<std::vector<double>>>(std::move(x), std::move(y));
        eval_ = [spline](double t) { return (*spline)(t); };
    } else {
        eval_ = [x = std::move(x), y = std::move(y)](double t) {
            auto it = std::upper_bound(x.begin(), x.end(), t);
            std::size_t i = it == x.begin() ? 1 : static_cast<std::size_t>(it - x.begin());
            i = std::min(i, x.size() - 1);
            const double w = (t - x[i - 1]) / (x[i] - x[i - 1]);
            return y[i - 1] + w * (y[i] - y[i - 1]);
        };
    }
}

double MonotoneCurve::operator()(double x) const { return eval_(x); }

double sigma_metric(std::span<const double> p_exp, std::span<const double> p_theo) {
    const std::size_t n = p_exp.size();
    if (n != p_theo.size()) throw DomainError("sigma: experimental/theory sizes differ");
    if (n < 2) throw DomainError("sigma: need at least two matched points (N(N-1) = 0)");
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!(p_exp[j] > 0.0)) {
            throw DomainError("sigma: experimental probability must be positive");
        }
        const double r = (p_exp[j] - p_theo[j]) / p_exp[j];
        sum += r * r;
    }
    return std::sqrt(sum / (static_cast<double>(n) * static_cast<double>(n - 1)));
}

SigmaResult sigma_metric(const ExperimentalCurve& exp, std::span<const double> theory_k_perp,
                         std::span<const double> theory_p) {
    exp.validate();
    const MonotoneCurve theory({theory_k_perp.begin(), theory_k_perp.end()},
                               {theory_p.begin(), theory_p.end()});
    SigmaResult out;
    for (std::size_t i = 0; i < exp.k_perp.size(); ++i) {
        const double k = exp.k_perp[i];
        if (k < theory.x_min() || k > theory.x_max()) continue;
        out.points.push_back({k, exp.probability[i], theory(k)});
    }
    if (out.points.empty()) {
        throw DomainError("sigma: experimental and theoretical k_perp ranges are disjoint");
    }
    std::vector<double> pe, pt;
    for (const auto& m : out.points) {
        pe.push_back(m.p_exp);
        pt.push_back(m.p_theo);
    }
    out.sigma = sigma_metric(pe, pt);
    return out;
}

SigmaResult sigma_metric(const ExperimentalCurve& exp, const ScanResult& theo) {
    std::vector<double> k, p;
    for (const auto& r : theo.records) {
        k.push_back(r.k_perp);
        p.push_back(r.p_qr);
    }
    return sigma_metric(exp, k, p);
}

ThresholdFit fit_threshold_line(std::span<const double> k_perp, std::span<const double> p) {
    const std::size_t n = k_perp.size();
    if (n != p.size() || n < 2) throw DomainError("threshold fit: need matching samples");
    double mk = 0.0, mp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mk += k_perp[i];
        mp += p[i];
    }
    mk /= static_cast<double>(n);
    mp /= static_cast<double>(n);
    double skk = 0.0, skp = 0.0, spp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        skk += (k_perp[i] - mk) * (k_perp[i] - mk);
        skp += (k_perp[i] - mk) * (p[i] - mp);
        spp += (p[i] - mp) * (p[i] - mp);
    }
    if (std::all_of(k_perp.begin(), k_perp.end(), [&](double k) { return k == k_perp[0]; })) {
        throw DomainError("threshold fit: k_perp values are all equal");
    }

    ThresholdFit fit;
    fit.slope = skp / skk;
    fit.intercept = mp - fit.slope * mk;
    fit.b_nm = -0.5 * fit.slope;
    fit.points = n;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = p[i] - (fit.intercept + fit.slope * k_perp[i]);
        ss_res += r * r;
    }
    fit.rms_residual = std::sqrt(ss_res / static_cast<double>(n));
    fit.r_squared = spp > 0.0 ? 1.0 - ss_res / spp : 1.0;
    return fit;
}

ThresholdFit threshold_fit(const ScanResult& scan, double cutoff_nm) {
    std::vector<double> k, p;
    for (const auto& r : scan.records) {
        if (r.k_perp > 0.0 && r.k_perp <= cutoff_nm) {
            k.push_back(r.k_perp);
            p.push_back(r.p_qr);
        }
    }
    if (k.size() < 5) {
        throw DomainError("threshold fit: " + std::to_string(k.size()) +
                          " scan points below the cutoff, need at least 5");
    }
    return fit_threshold_line(k, p);
}

std::vector<AbsorberParams> default_absorber_variants(const AbsorberParams& base) {
    std::vector<AbsorberParams> out{base};
    for (double scale : {0.5, 1.0, 2.0}) {
        for (double alpha : {1.0, 2.0, 4.0}) {
            AbsorberParams v = base;
            v.amplitude = base.amplitude * scale;
            v.alpha = alpha;
            if (v == base) continue;
            out.push_back(v);
        }
    }
    return out;
}

AbsorberIndependence absorber_independence_report(const Surface& surface, const BeamSource& beam,
                                                  double theta_grazing,
                                                  std::span<const AbsorberParams> variants,
                                                  const GridSpec& grid) {
    if (variants.size() < 2) throw DomainError("absorber independence: need at least 2 variants");
    AbsorberIndependence report;
    for (const auto& v : variants) {
        if (!v.enabled) report.category_warning = true;
        report.p_qr.push_back(solve_point(surface, beam, theta_grazing, v, grid).p_qr);
    }
    const double ref = report.p_qr.front();
    for (double p : report.p_qr) {
        const double rel = ref > 0.0 ? std::abs(p - ref) / ref
                                     : (p == ref ? 0.0 : std::numeric_limits<double>::infinity());
        report.max_relative_spread = std::max(report.max_relative_spread, rel);
    }
    return report;
}

std::optional<double> interpolate_p_qr(const ScanResult& scan, double k_perp_nm) {
    if (scan.records.size() < 2) return std::nullopt;
    std::vector<double> k, p;
    for (const auto& r : scan.records) {
        k.push_back(r.k_perp);
        p.push_back(r.p_qr);
    }
    if (k_perp_nm < k.front() || k_perp_nm > k.back()) return std::nullopt;
    return MonotoneCurve(std::move(k), std::move(p))(k_perp_nm);
}

std::optional<double> temperature_spread(std::span<const ScanResult> scans, double k_perp_nm) {
    std::vector<double> values;
    for (const auto& s : scans) {
        if (auto v = interpolate_p_qr(s, k_perp_nm)) values.push_back(*v);
    }
    if (values.size() < 2) return std::nullopt;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
}

} // namespace qreflect

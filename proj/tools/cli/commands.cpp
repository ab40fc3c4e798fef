#include "commands.hpp"

#include <qreflect/units.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace qreflect::cli {

namespace {

std::vector<Surface> build_surfaces(const RunConfig& cfg) {
    std::vector<Surface> out;
    try {
        for (const auto& p : resolve_presets(cfg)) out.push_back(make_surface(p, cfg.n_max, cfg.coupling));
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    }
    return out;
}

RunConfig resolve_common(RunConfig cfg, const AngleSpec& default_angles) {
    if (cfg.surfaces.empty()) throw UsageError("no surface given (use --surface NAME)");
    if (cfg.temperatures.empty()) {
        cfg.temperatures.assign(std::begin(kDefaultTemperatures), std::end(kDefaultTemperatures));
    }
    if (!cfg.angles) cfg.angles = default_angles;
    try {
        cfg.absorber.validate();
        (void)cfg.angles->radians();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    (void)build_surfaces(cfg);
    return cfg;
}

std::string echo(const RunConfig& cfg) {
    std::istringstream in(emit_config(cfg));
    std::string line, out;
    while (std::getline(in, line)) out += "# " + line + "\n";
    return out;
}

} // namespace

RunConfig resolve_for_scan(RunConfig cfg) { return resolve_common(std::move(cfg), kDefaultScanAngles); }

RunConfig resolve_for_verify(RunConfig cfg) {
    return resolve_common(std::move(cfg), kDefaultVerifyAngles);
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<std::string> scan_columns(bool flat, int n_max) {
    std::vector<std::string> cols{"theta_grazing_mrad", "k_perp_nm_inv", "p_qr", "I_0"};
    if (flat) return cols;
    for (int m = 1; m <= n_max; ++m) {
        cols.push_back("I_+" + std::to_string(m));
        cols.push_back("I_-" + std::to_string(m));
    }
    return cols;
}

std::string format_scan_csv(const ScanResult& scan, const Surface& surface,
                            const RunConfig& resolved) {
    std::ostringstream out;
    out << "# qreflect scan\n" << echo(resolved);
    out << "# D_meV = " << format_number(surface.potential.d_well) << "\n";
    out << "# z_bar_A = " << format_number(surface.potential.z_bar) << "\n";
    out << "# k_i_nm_inv = " << format_number(units::to_per_nm(scan.beam.k_i())) << "\n";

    const int n_max = surface.grating ? surface.grating->n_max : 0;
    const auto cols = scan_columns(surface.is_flat(), n_max);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";

    for (const auto& r : scan.records) {
        out << format_number(units::rad_to_mrad(r.theta_grazing)) << ','
            << format_number(r.k_perp) << ',' << format_number(r.p_qr) << ','
            << format_number(r.intensity(0));
        for (int m = 1; m <= n_max; ++m) {
            out << ',' << format_number(r.intensity(theory_index(m)));
            out << ',' << format_number(r.intensity(theory_index(-m)));
        }
        out << "\n";
    }
    return out.str();
}

std::string scan_file_name(const std::string& surface, double t0) {
    return surface + "_T" + format_exact(t0) + "K.csv";
}

std::vector<std::string> cmd_scan(const RunConfig& input, std::ostream& log) {
    const RunConfig cfg = resolve_for_scan(input);
    const auto surfaces = build_surfaces(cfg);
    const auto angles = cfg.angles->radians();

    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& surface : surfaces) {
        for (double t0 : cfg.temperatures) {
            log << "scan " << surface.id << " T0=" << format_exact(t0) << " K, " << angles.size()
                << " angles\n";
            const auto beam = BeamSource::from_temperature(t0);
            const auto scan = run_scan(surface, beam, angles, cfg.absorber, cfg.grid);
            RunConfig resolved = cfg;
            resolved.surfaces = {surface.id};
            resolved.temperatures = {t0};
            files.emplace_back(scan_file_name(surface.id, t0),
                               format_scan_csv(scan, surface, resolved));
        }
    }

    const std::filesystem::path dir(cfg.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + cfg.out + "': " + ec.message());
    std::vector<std::string> written;
    for (const auto& [name, text] : files) {
        const auto path = (dir / name).string();
        std::ofstream f(path, std::ios::binary);
        f << text;
        f.close();
        if (!f) throw Error("cannot write '" + path + "'");
        written.push_back(path);
    }
    return written;
}

bool VerifyReport::passed() const {
    return std::all_of(gates.begin(), gates.end(), [](const GateResult& g) { return g.passed; });
}

std::string VerifyReport::to_json(const RunConfig& resolved) const {
    nlohmann::ordered_json doc;
    doc["passed"] = passed();
    doc["config"] = emit_config(resolved);
    auto& arr = doc["gates"] = nlohmann::ordered_json::array();
    for (const auto& g : gates) {
        nlohmann::ordered_json j;
        j["name"] = g.name;
        j["passed"] = g.passed;
        j["worst"] = g.worst;
        j["limit"] = g.limit;
        j["message"] = g.message;
        arr.push_back(std::move(j));
    }
    return doc.dump(2);
}

namespace {

struct VerifyPoint {
    const Surface* surface;
    BeamSource beam;
    double theta;

    std::string label() const {
        return surface->id + " T0=" + format_exact(beam.t0) +
               " theta=" + format_number(units::rad_to_mrad(theta)) + "mrad";
    }
};

// Probabilities the scan would report: P^QR and each order within n_max.
std::vector<double> reported(const ScatteringSolution& s, int n_max) {
    std::vector<double> out{s.p_qr};
    for (int n = -n_max; n <= n_max; ++n) out.push_back(s.intensity(n));
    return out;
}

// Largest `measure` over the points; the gate passes when it stays below
// `limit`. Any exception fails the gate.
GateResult run_gate(const std::string& name, double limit, const std::vector<VerifyPoint>& points,
                    const std::function<double(const VerifyPoint&)>& measure, std::ostream& log) {
    GateResult g{name, false, 0.0, limit, {}};
    std::string where, current;
    try {
        for (const auto& pt : points) {
            current = pt.label();
            const double v = measure(pt);
            if (v > g.worst || std::isnan(v) || where.empty()) {
                g.worst = v;
                where = pt.label();
            }
        }
        g.passed = g.worst < limit;
        if (!g.passed) g.message = "worst at " + where;
    } catch (const std::exception& e) {
        g.worst = std::numeric_limits<double>::infinity();
        g.message = current + ": " + e.what();
    }
    log << "  " << name << ": " << (g.passed ? "pass" : "FAIL") << " (worst " << g.worst
        << ", limit " << limit << ")" << (g.message.empty() ? "" : " " + g.message) << "\n";
    return g;
}

} // namespace

VerifyReport cmd_verify(const RunConfig& input, std::ostream& log) {
    const RunConfig cfg = resolve_for_verify(input);
    const auto surfaces = build_surfaces(cfg);
    const auto angles = cfg.angles->radians();

    std::vector<VerifyPoint> points;
    for (const auto& s : surfaces) {
        for (double t0 : cfg.temperatures) {
            for (double th : angles) points.push_back({&s, BeamSource::from_temperature(t0), th});
        }
    }
    auto n_max_of = [](const Surface& s) { return s.grating ? s.grating->n_max : 0; };
    auto base = [&](const VerifyPoint& pt) {
        return solve_point(*pt.surface, pt.beam, pt.theta, cfg.absorber, cfg.grid);
    };

    VerifyReport report;
    log << "verify: " << points.size() << " points\n";

    report.gates.push_back(run_gate("unitarity", 1e-6, points, [&](const VerifyPoint& pt) {
        AbsorberParams off = cfg.absorber;
        off.enabled = false;
        return std::abs(solve_point(*pt.surface, pt.beam, pt.theta, off, cfg.grid).unitarity_defect);
    }, log));

    if (cfg.absorber.enabled) {
        report.gates.push_back(run_gate("subunitarity", 1.0 - 1e-6, points, [&](const VerifyPoint& pt) {
            return base(pt).p_qr;
        }, log));
    } else {
        report.gates.push_back({"subunitarity", false, 1.0, 1.0 - 1e-6,
                                "absorber disabled: P^QR = 1, nothing is absorbed"});
        log << "  subunitarity: FAIL (absorber disabled)\n";
    }

    {
        const auto variants = default_absorber_variants(cfg.absorber);
        auto g = run_gate("absorber_independence", 1e-2, points, [&](const VerifyPoint& pt) {
            const auto r = absorber_independence_report(*pt.surface, pt.beam, pt.theta, variants,
                                                        cfg.grid);
            if (r.category_warning) throw DomainError("absorber disabled");
            return r.max_relative_spread;
        }, log);
        report.gates.push_back(g);
    }

    report.gates.push_back(run_gate("grid_convergence", 1e-4, points, [&](const VerifyPoint& pt) {
        const int n_max = n_max_of(*pt.surface);
        const auto a = reported(base(pt), n_max);
        const auto b = reported(
            solve_point(*pt.surface, pt.beam, pt.theta, cfg.absorber, cfg.grid.refined(2.0)), n_max);
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
        return worst;
    }, log));

    report.gates.push_back(run_gate("channel_convergence", 1e-3, points, [&](const VerifyPoint& pt) {
        if (pt.surface->is_flat()) return 0.0;
        const int n_max = n_max_of(*pt.surface);
        const auto a = reported(base(pt), n_max);
        const Surface wide = with_n_max(*pt.surface, 2 * n_max);
        const auto b = reported(solve_point(wide, pt.beam, pt.theta, cfg.absorber, cfg.grid), n_max);
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(a[i]), 1e-6));
        }
        return worst;
    }, log));

    return report;
}

CurveColumns read_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    CurveColumns c;
    std::string line;
    std::size_t line_no = 0, ik = 0, ip = 1;
    bool header = false;
    auto cells = [](const std::string& s) {
        std::vector<std::string> out;
        std::string item;
        std::istringstream ss(s);
        while (std::getline(ss, item, ',')) out.push_back(item);
        return out;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto row = cells(line);
        if (!header) {
            header = true;
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (row[i] == "k_perp_nm_inv") ik = i;
                if (row[i] == "p_qr" || row[i] == "probability") ip = i;
            }
            continue;
        }
        if (row.size() <= std::max(ik, ip)) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": too few columns");
        }
        try {
            c.k_perp.push_back(std::stod(row[ik]));
            c.p.push_back(std::stod(row[ip]));
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": not a number");
        }
    }
    if (!header) throw ParseError(path + ": missing header line");
    return c;
}

SigmaResult cmd_fit_sigma(const std::string& theory_csv, const std::string& experiment_csv,
                          std::ostream& out) {
    const auto theory = read_curve_csv(theory_csv);
    const auto exp_cols = read_curve_csv(experiment_csv);
    ExperimentalCurve exp{exp_cols.k_perp, exp_cols.p, experiment_csv};
    const auto result = sigma_metric(exp, theory.k_perp, theory.p);
    out << "sigma = " << format_number(result.sigma) << "\n";
    out << "points = " << result.points.size() << "\n";
    out << "k_perp_nm_inv,p_exp,p_theo\n";
    for (const auto& m : result.points) {
        out << format_number(m.k_perp) << ',' << format_number(m.p_exp) << ','
            << format_number(m.p_theo) << "\n";
    }
    return result;
}

} // namespace qreflect::cli

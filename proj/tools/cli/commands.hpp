#pragma once

#include "run_config.hpp"

#include <qreflect/errors.hpp>
#include <qreflect/experiment.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace qreflect::cli {

/// Bad invocation or configuration: exit code 2.
class UsageError : public Error {
  public:
    using Error::Error;
};

inline constexpr double kDefaultTemperatures[] = {8.7, 50.0, 300.0};

/// Grid used by `scan` when no --angles is given.
inline const AngleSpec kDefaultScanAngles{0.1, 25.0, 60, true};
/// Representative points used by `verify` when no --angles is given.
inline const AngleSpec kDefaultVerifyAngles{0.5, 20.0, 3, true};

/// Fills in default temperatures and angles; validates surfaces up front.
RunConfig resolve_for_scan(RunConfig cfg);
RunConfig resolve_for_verify(RunConfig cfg);

/// `%.12g`.
std::string format_number(double v);

/// Column header of a scan CSV. Grating surfaces list orders 0, +1, -1, ...,
/// +n_max, -n_max in the experimental sign convention.
std::vector<std::string> scan_columns(bool flat, int n_max);

/// Full CSV text for one scan; `resolved` is echoed as '#' lines.
std::string format_scan_csv(const ScanResult& scan, const Surface& surface,
                            const RunConfig& resolved);

/// `<surface>_T<t0>K.csv`.
std::string scan_file_name(const std::string& surface, double t0);

/// Runs every (surface, T0) scan and writes one CSV each under cfg.out.
/// Returns the written paths.
std::vector<std::string> cmd_scan(const RunConfig& cfg, std::ostream& log);

struct GateResult {
    std::string name;
    bool passed = false;
    double worst = 0.0;
    double limit = 0.0; ///< passes when worst < limit
    std::string message;
};

struct VerifyReport {
    std::vector<GateResult> gates;
    bool passed() const;
    std::string to_json(const RunConfig& resolved) const;
};

/// Unitarity, subunitarity, absorber-independence, grid and channel
/// convergence gates at every (surface, T0, angle) point of the config.
VerifyReport cmd_verify(const RunConfig& cfg, std::ostream& log);

/// Two numeric columns pulled from a CSV: `k_perp_nm_inv` and `p_qr` or
/// `probability` by header name, else the first two columns.
struct CurveColumns {
    std::vector<double> k_perp;
    std::vector<double> p;
};
CurveColumns read_curve_csv(const std::string& path);

/// Prints sigma and the matched-point table; returns sigma.
SigmaResult cmd_fit_sigma(const std::string& theory_csv, const std::string& experiment_csv,
                          std::ostream& out);

} // namespace qreflect::cli

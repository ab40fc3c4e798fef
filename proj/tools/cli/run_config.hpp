#pragma once

#include <qreflect/cc_solver.hpp>
#include <qreflect/potential.hpp>
#include <qreflect/surfaces.hpp>

#include <optional>
#include <string>
#include <vector>

namespace qreflect::cli {

/// `start:stop:count[log|lin]`, angles in mrad.
struct AngleSpec {
    double start_mrad = 0.1;
    double stop_mrad = 25.0;
    int count = 60;
    bool logarithmic = true;

    std::vector<double> radians() const;
    std::string to_string() const;
    static AngleSpec parse(const std::string& text);
    bool operator==(const AngleSpec&) const = default;
};

/// Everything a run needs. Empty lists and unset optionals fall back to the
/// subcommand defaults when resolved.
struct RunConfig {
    std::vector<std::string> surfaces;
    std::vector<double> temperatures; ///< K
    std::optional<AngleSpec> angles;
    AbsorberParams absorber;
    int n_max = 10;
    CouplingConvention coupling = CouplingConvention::normalized;
    GridSpec grid;
    std::string out = ".";
    std::string presets; ///< preset file, empty for the default lookup
    std::optional<SurfacePreset> custom; ///< inline surface, usable by name

    bool operator==(const RunConfig&) const;
};

/// key = value lines; '#' starts a comment. Throws ParseError.
RunConfig parse_config(const std::string& text, const std::string& origin = "config");
RunConfig load_config(const std::string& path);

/// Inverse of parse_config; every field is written, doubles round-trip exactly.
std::string emit_config(const RunConfig& cfg);

/// Shortest decimal text that reads back to the same double.
std::string format_exact(double v);

/// `--absorber A,alpha,zi`.
AbsorberParams parse_absorber(const std::string& text);

/// Preset records for every surface named in the config, in order. Throws
/// DomainError for an unknown name.
std::vector<SurfacePreset> resolve_presets(const RunConfig& cfg);

} // namespace qreflect::cli

#pragma once

#include "qreflect/potential.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qreflect {

/// One record of the surface preset file (SI C3, Angstrom lengths).
struct SurfacePreset {
    std::string name;
    double chi = 0.0;   ///< Angstrom^-1
    double c3_si = 0.0; ///< J m^3
    double l = 0.0;     ///< Angstrom
    std::optional<double> grating_a; ///< strip width, Angstrom
    std::optional<double> grating_d; ///< period, Angstrom
};

/// A surface ready for scattering: matched potential plus optional grating.
struct Surface {
    std::string id;
    SurfacePotential potential;
    std::optional<Grating> grating;

    bool is_flat() const { return !grating.has_value(); }
};

/// Matches the potential and attaches the grating, if any.
Surface make_surface(const SurfacePreset& preset, int n_max = 10,
                     CouplingConvention coupling = CouplingConvention::normalized);

/// Same surface with a different Fourier truncation (no-op when flat).
Surface with_n_max(Surface s, int n_max);

/// Parses the JSON preset list. Throws ParseError on malformed input.
std::vector<SurfacePreset> parse_surface_presets(const std::string& json_text);
std::vector<SurfacePreset> load_surface_presets(const std::string& path);

/// $QREFLECT_PRESETS, else the source-tree data file, else the installed one.
std::string default_presets_path();

/// Throws DomainError listing the available names when `name` is unknown.
const SurfacePreset& find_preset(const std::vector<SurfacePreset>& presets,
                                 const std::string& name);

} // namespace qreflect

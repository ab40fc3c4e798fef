#include "qreflect/surfaces.hpp"

#include "qreflect/errors.hpp"
#include "qreflect/units.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qreflect {

Surface make_surface(const SurfacePreset& preset, int n_max, CouplingConvention coupling) {
    Surface s{preset.name,
              SurfacePotential::from_matching(preset.chi, units::c3_to_internal(preset.c3_si),
                                              preset.l),
              std::nullopt};
    if (preset.grating_a || preset.grating_d) {
        if (!(preset.grating_a && preset.grating_d)) {
            throw DomainError("surface '" + preset.name + "': grating needs both a and d");
        }
        Grating g{*preset.grating_a, *preset.grating_d, n_max, coupling};
        g.validate();
        s.grating = g;
    }
    return s;
}

Surface with_n_max(Surface s, int n_max) {
    if (s.grating) {
        s.grating->n_max = n_max;
        s.grating->validate();
    }
    return s;
}

std::vector<SurfacePreset> parse_surface_presets(const std::string& json_text) {
    using nlohmann::json;
    std::vector<SurfacePreset> out;
    try {
        const json doc = json::parse(json_text);
        if (!doc.is_array()) throw ParseError("surface presets: expected a JSON array");
        for (const auto& rec : doc) {
            SurfacePreset p;
            p.name = rec.at("name").get<std::string>();
            p.chi = rec.at("chi").get<double>();
            p.c3_si = rec.at("c3_si").get<double>();
            p.l = rec.at("l").get<double>();
            if (rec.contains("grating")) {
                const auto& g = rec.at("grating");
                p.grating_a = g.at("a").get<double>();
                p.grating_d = g.at("d").get<double>();
            }
            out.push_back(std::move(p));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("surface presets: ") + e.what());
    }
    return out;
}

std::vector<SurfacePreset> load_surface_presets(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("surface presets: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_surface_presets(buf.str());
}

std::string default_presets_path() {
    if (const char* env = std::getenv("QREFLECT_PRESETS"); env && *env) return env;
    if (std::filesystem::exists(QREFLECT_PRESETS_SOURCE)) return QREFLECT_PRESETS_SOURCE;
    return QREFLECT_PRESETS_INSTALLED;
}

const SurfacePreset& find_preset(const std::vector<SurfacePreset>& presets,
                                 const std::string& name) {
    for (const auto& p : presets) {
        if (p.name == name) return p;
    }
    std::string names;
    for (const auto& p : presets) names += (names.empty() ? "" : ", ") + p.name;
    throw DomainError("unknown surface '" + name + "'; available presets: " + names);
}

} // namespace qreflect

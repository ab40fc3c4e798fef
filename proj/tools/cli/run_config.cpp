#include "run_config.hpp"

#include <qreflect/errors.hpp>
#include <qreflect/experiment.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace qreflect::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw ParseError(what + ": not a number: '" + s + "'");
    }
    return v;
}

int to_int(const std::string& s, const std::string& what) {
    int v = 0;
    const auto t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw ParseError(what + ": not an integer: '" + s + "'");
    }
    return v;
}

bool to_bool(const std::string& s, const std::string& what) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ParseError(what + ": expected true or false, got '" + s + "'");
}

void check_name(const std::string& name, const std::string& what) {
    if (name.empty()) throw ParseError(what + ": empty surface name");
    for (char c : name) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                        c == '.';
        if (!ok) throw ParseError(what + ": invalid character in surface name '" + name + "'");
    }
}

bool same_preset(const SurfacePreset& a, const SurfacePreset& b) {
    return a.name == b.name && a.chi == b.chi && a.c3_si == b.c3_si && a.l == b.l &&
           a.grating_a == b.grating_a && a.grating_d == b.grating_d;
}

} // namespace

std::string format_exact(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

std::vector<double> AngleSpec::radians() const {
    return angle_grid(start_mrad, stop_mrad, count, logarithmic);
}

std::string AngleSpec::to_string() const {
    return format_exact(start_mrad) + ":" + format_exact(stop_mrad) + ":" +
           std::to_string(count) + (logarithmic ? "log" : "lin");
}

AngleSpec AngleSpec::parse(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) {
        throw ParseError("angles: expected start:stop:count[log|lin], got '" + text + "'");
    }
    AngleSpec a;
    a.start_mrad = to_double(parts[0], "angles start");
    a.stop_mrad = to_double(parts[1], "angles stop");
    std::string count = parts[2];
    if (count.size() > 3 && count.ends_with("log")) {
        a.logarithmic = true;
        count.resize(count.size() - 3);
    } else if (count.size() > 3 && count.ends_with("lin")) {
        a.logarithmic = false;
        count.resize(count.size() - 3);
    }
    a.count = to_int(count, "angles count");
    if (a.count < 1) throw ParseError("angles: count must be >= 1");
    if (!(a.start_mrad > 0.0) || (a.count > 1 && !(a.stop_mrad > a.start_mrad))) {
        throw ParseError("angles: need 0 < start < stop, got '" + text + "'");
    }
    if (a.stop_mrad > kMaxScanAngle * 1e3) {
        throw ParseError("angles: stop exceeds " + format_exact(kMaxScanAngle * 1e3) + " mrad");
    }
    return a;
}

AbsorberParams parse_absorber(const std::string& text) {
    const auto parts = split(text, ',');
    if (parts.size() != 3) throw ParseError("absorber: expected A,alpha,zi, got '" + text + "'");
    AbsorberParams w;
    w.amplitude = to_double(parts[0], "absorber A");
    w.alpha = to_double(parts[1], "absorber alpha");
    w.z_i = to_double(parts[2], "absorber zi");
    try {
        w.validate();
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    return w;
}

bool RunConfig::operator==(const RunConfig& o) const {
    const bool custom_eq = custom.has_value() == o.custom.has_value() &&
                           (!custom || same_preset(*custom, *o.custom));
    return surfaces == o.surfaces && temperatures == o.temperatures && angles == o.angles &&
           absorber == o.absorber && n_max == o.n_max && coupling == o.coupling &&
           grid == o.grid && out == o.out && presets == o.presets && custom_eq;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::map<std::string, std::string> custom;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(line_no);
        if (eq == std::string::npos) throw ParseError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string what = where + ": " + key;

        if (key == "surface") {
            cfg.surfaces.clear();
            if (!value.empty()) {
                for (const auto& s : split(value, ',')) {
                    check_name(s, what);
                    cfg.surfaces.push_back(s);
                }
            }
        } else if (key == "T0") {
            cfg.temperatures.clear();
            if (!value.empty()) {
                for (const auto& s : split(value, ',')) {
                    const double t = to_double(s, what);
                    if (!(t > 0.0)) throw ParseError(what + ": temperature must be positive");
                    cfg.temperatures.push_back(t);
                }
            }
        } else if (key == "angles") {
            cfg.angles = AngleSpec::parse(value);
        } else if (key == "absorber.amplitude") {
            cfg.absorber.amplitude = to_double(value, what);
        } else if (key == "absorber.alpha") {
            cfg.absorber.alpha = to_double(value, what);
        } else if (key == "absorber.z_i") {
            cfg.absorber.z_i = to_double(value, what);
        } else if (key == "absorber.enabled") {
            cfg.absorber.enabled = to_bool(value, what);
        } else if (key == "n_max") {
            cfg.n_max = to_int(value, what);
            if (cfg.n_max < 0) throw ParseError(what + ": must be >= 0");
        } else if (key == "coupling") {
            try {
                cfg.coupling = coupling_convention_from_string(value.c_str());
            } catch (const DomainError& e) {
                throw ParseError(where + ": " + e.what());
            }
        } else if (key == "grid.z_min") {
            cfg.grid.z_min = to_double(value, what);
        } else if (key == "grid.z_max") {
            cfg.grid.z_max = to_double(value, what);
        } else if (key == "grid.step") {
            cfg.grid.step = to_double(value, what);
        } else if (key == "grid.wkb_fraction") {
            cfg.grid.wkb_fraction = to_double(value, what);
        } else if (key == "grid.tail_fraction") {
            cfg.grid.tail_fraction = to_double(value, what);
        } else if (key == "grid.closed_fraction") {
            cfg.grid.closed_fraction = to_double(value, what);
        } else if (key == "out") {
            cfg.out = value;
        } else if (key == "presets") {
            cfg.presets = value;
        } else if (key.starts_with("custom.")) {
            custom[key.substr(7)] = value;
        } else {
            throw ParseError(where + ": unknown key '" + key + "'");
        }
    }
    try {
        cfg.absorber.validate();
    } catch (const DomainError& e) {
        throw ParseError(origin + ": " + e.what());
    }

    if (!custom.empty()) {
        SurfacePreset p;
        auto take = [&](const char* k) -> std::optional<std::string> {
            auto it = custom.find(k);
            if (it == custom.end()) return std::nullopt;
            std::string v = it->second;
            custom.erase(it);
            return v;
        };
        auto need = [&](const char* k) {
            auto v = take(k);
            if (!v) throw ParseError(origin + ": inline surface lacks custom." + k);
            return *v;
        };
        p.name = need("name");
        check_name(p.name, origin + ": custom.name");
        p.chi = to_double(need("chi"), "custom.chi");
        p.c3_si = to_double(need("c3_si"), "custom.c3_si");
        p.l = to_double(need("l"), "custom.l");
        if (auto a = take("grating_a")) p.grating_a = to_double(*a, "custom.grating_a");
        if (auto d = take("grating_d")) p.grating_d = to_double(*d, "custom.grating_d");
        if (!custom.empty()) {
            throw ParseError(origin + ": unknown key 'custom." + custom.begin()->first + "'");
        }
        cfg.custom = p;
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string emit_config(const RunConfig& cfg) {
    std::ostringstream out;
    auto join = [](const auto& items, auto fmt) {
        std::string s;
        for (const auto& x : items) s += (s.empty() ? "" : ",") + fmt(x);
        return s;
    };
    out << "surface = " << join(cfg.surfaces, [](const std::string& s) { return s; }) << "\n";
    out << "T0 = " << join(cfg.temperatures, [](double t) { return format_exact(t); }) << "\n";
    if (cfg.angles) out << "angles = " << cfg.angles->to_string() << "\n";
    out << "absorber.amplitude = " << format_exact(cfg.absorber.amplitude) << "\n";
    out << "absorber.alpha = " << format_exact(cfg.absorber.alpha) << "\n";
    out << "absorber.z_i = " << format_exact(cfg.absorber.z_i) << "\n";
    out << "absorber.enabled = " << (cfg.absorber.enabled ? "true" : "false") << "\n";
    out << "n_max = " << cfg.n_max << "\n";
    out << "coupling = " << to_string(cfg.coupling) << "\n";
    out << "grid.z_min = " << format_exact(cfg.grid.z_min) << "\n";
    out << "grid.z_max = " << format_exact(cfg.grid.z_max) << "\n";
    out << "grid.step = " << format_exact(cfg.grid.step) << "\n";
    out << "grid.wkb_fraction = " << format_exact(cfg.grid.wkb_fraction) << "\n";
    out << "grid.tail_fraction = " << format_exact(cfg.grid.tail_fraction) << "\n";
    out << "grid.closed_fraction = " << format_exact(cfg.grid.closed_fraction) << "\n";
    out << "out = " << cfg.out << "\n";
    out << "presets = " << cfg.presets << "\n";
    if (cfg.custom) {
        const auto& p = *cfg.custom;
        out << "custom.name = " << p.name << "\n";
        out << "custom.chi = " << format_exact(p.chi) << "\n";
        out << "custom.c3_si = " << format_exact(p.c3_si) << "\n";
        out << "custom.l = " << format_exact(p.l) << "\n";
        if (p.grating_a) out << "custom.grating_a = " << format_exact(*p.grating_a) << "\n";
        if (p.grating_d) out << "custom.grating_d = " << format_exact(*p.grating_d) << "\n";
    }
    return out.str();
}

std::vector<SurfacePreset> resolve_presets(const RunConfig& cfg) {
    std::vector<SurfacePreset> available =
        load_surface_presets(cfg.presets.empty() ? default_presets_path() : cfg.presets);
    if (cfg.custom) {
        std::erase_if(available, [&](const SurfacePreset& p) { return p.name == cfg.custom->name; });
        available.push_back(*cfg.custom);
    }
    std::vector<SurfacePreset> out;
    for (const auto& name : cfg.surfaces) out.push_back(find_preset(available, name));
    return out;
}

} // namespace qreflect::cli

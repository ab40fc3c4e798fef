#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace qreflect;
using namespace qreflect::cli;

namespace {

struct Overrides {
    std::string config;
    std::vector<std::string> surfaces;
    std::vector<double> temperatures;
    std::string angles;
    std::string absorber;
    bool no_absorber = false;
    int n_max = -1;
    std::string coupling;
    double step = 0.0;
    std::string out;
    std::string presets;
    bool print_config = false;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "key = value config file (flags override it)");
    cmd->add_option("--surface", o.surfaces, "surface preset name (repeatable)");
    cmd->add_option("--T0", o.temperatures, "beam stagnation temperature in K (repeatable)");
    cmd->add_option("--angles", o.angles, "grazing angles start:stop:count[log|lin], mrad");
    cmd->add_option("--absorber", o.absorber, "Woods-Saxon absorber A,alpha,zi (meV, -, A)");
    cmd->add_flag("--no-absorber", o.no_absorber, "disable the absorber");
    cmd->add_option("--nmax", o.n_max, "highest diffraction order kept");
    cmd->add_option("--coupling", o.coupling, "fourier | normalized | doubled_sinc");
    cmd->add_option("--step", o.step, "nominal integration step, A");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--presets", o.presets, "surface preset file");
    cmd->add_flag("--print-config", o.print_config, "print the resolved config and exit");
}

RunConfig build_config(const Overrides& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (!o.surfaces.empty()) cfg.surfaces = o.surfaces;
    if (!o.temperatures.empty()) cfg.temperatures = o.temperatures;
    if (!o.angles.empty()) cfg.angles = AngleSpec::parse(o.angles);
    if (!o.absorber.empty()) {
        const bool enabled = cfg.absorber.enabled;
        cfg.absorber = parse_absorber(o.absorber);
        cfg.absorber.enabled = enabled;
    }
    if (o.no_absorber) cfg.absorber.enabled = false;
    if (o.n_max >= 0) cfg.n_max = o.n_max;
    if (!o.coupling.empty()) {
        try {
            cfg.coupling = coupling_convention_from_string(o.coupling.c_str());
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
    }
    if (o.step > 0.0) cfg.grid.step = o.step;
    if (!o.out.empty()) cfg.out = o.out;
    if (!o.presets.empty()) cfg.presets = o.presets;
    for (double t : cfg.temperatures) {
        if (!(t > 0.0)) throw UsageError("--T0 must be positive");
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum reflection and diffraction of He beams from flat and structured surfaces"};
    app.require_subcommand(1);

    Overrides scan_opts, verify_opts;
    auto* scan = app.add_subcommand("scan", "P^QR and diffraction intensities over an angle grid");
    add_run_options(scan, scan_opts);
    auto* verify = app.add_subcommand("verify", "unitarity, absorber and convergence gates");
    add_run_options(verify, verify_opts);

    std::string theory_csv, experiment_csv;
    auto* fit = app.add_subcommand("fit-sigma", "relative deviation between theory and experiment");
    fit->add_option("theory", theory_csv, "scan CSV")->required();
    fit->add_option("experiment", experiment_csv, "k_perp_nm_inv,probability CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*scan) {
            RunConfig cfg = resolve_for_scan(build_config(scan_opts));
            if (scan_opts.print_config) {
                std::cout << emit_config(cfg);
                return 0;
            }
            for (const auto& path : cmd_scan(cfg, std::cerr)) std::cout << path << "\n";
            return 0;
        }
        if (*verify) {
            RunConfig cfg = resolve_for_verify(build_config(verify_opts));
            if (verify_opts.print_config) {
                std::cout << emit_config(cfg);
                return 0;
            }
            const auto report = cmd_verify(cfg, std::cerr);
            std::cout << report.to_json(cfg) << "\n";
            return report.passed() ? 0 : 1;
        }
        if (*fit) {
            try {
                cmd_fit_sigma(theory_csv, experiment_csv, std::cout);
            } catch (const Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 1;
            }
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

#include <commands.hpp>
#include <run_config.hpp>

#include <qreflect/errors.hpp>

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace qreflect;
using namespace qreflect::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status;
    std::string output;
};

Run run_cli(const std::string& args) {
    const std::string cmd = std::string(QREFLECT_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (const auto n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int raw = ::pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("qreflect_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string presets_arg() {
    return std::string("--presets ") + QREFLECT_SOURCE_DIR + "/core/data/surfaces.json";
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("angle specs") {
    const auto a = AngleSpec::parse("0.1:25:60log");
    CHECK(a == AngleSpec{0.1, 25.0, 60, true});
    CHECK(AngleSpec::parse(a.to_string()) == a);
    const auto b = AngleSpec::parse("1:3:5lin");
    CHECK_FALSE(b.logarithmic);
    CHECK(b.radians().size() == 5);
    CHECK(b.radians()[4] == doctest::Approx(3e-3));
    CHECK(AngleSpec::parse("1:3:5").logarithmic);
    for (const char* bad : {"", "1:3", "1:30:5log", "1:3:0log", "a:3:5lin", "1:3:5cubic"}) {
        CHECK_THROWS_AS_MESSAGE(AngleSpec::parse(bad), ParseError, bad);
    }
}

TEST_CASE("absorber flag") {
    const auto a = parse_absorber("-4,1.5,0.25");
    CHECK(a.amplitude == -4.0);
    CHECK(a.alpha == 1.5);
    CHECK(a.z_i == 0.25);
    CHECK(a.enabled);
    CHECK_THROWS(parse_absorber("-4,1.5"));
    CHECK_THROWS(parse_absorber("x,1,2"));
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(2.5e-9) == "2.5e-09");
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -1e-300, 2.2250738585072014e-308}) {
        CHECK(std::stod(format_exact(v)) == v);
    }
}

TEST_CASE("config round trip") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        RunConfig c;
        c.surfaces = {"glass_slide", "structured_cr"};
        c.temperatures = {u(rng) * 300.0, 1.0 / 3.0};
        if (i % 2) c.angles = AngleSpec{u(rng), 20.0 + u(rng), 1 + i, i % 4 == 1};
        c.absorber = {-u(rng) * 10.0, 0.5 + u(rng), u(rng) - 0.5, i % 3 != 0};
        c.n_max = i;
        c.coupling = i % 3 == 0 ? CouplingConvention::fourier : CouplingConvention::doubled_sinc;
        c.grid.step = 0.01 * u(rng);
        c.grid.wkb_fraction = u(rng) * 0.1;
        c.grid.tail_fraction = u(rng) * 0.01;
        c.grid.closed_fraction = u(rng);
        c.out = "results dir/" + std::to_string(i);
        c.presets = i % 2 ? "/tmp/p.json" : "";
        if (i % 5 == 0) c.custom = SurfacePreset{"mine", u(rng), u(rng) * 1e-49, 90.0, 2.0, 7.0};
        const auto text = emit_config(c);
        const auto back = parse_config(text);
        CHECK(back == c);
        CHECK(emit_config(back) == text);
    }
}

TEST_CASE("config parse errors") {
    CHECK_THROWS_AS(parse_config("colour = red\n"), ParseError);
    CHECK_THROWS_AS(parse_config("n_max\n"), ParseError);
    CHECK_THROWS_AS(parse_config("n_max = ten\n"), ParseError);
    CHECK_THROWS_AS(parse_config("absorber.enabled = maybe\n"), ParseError);
    CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ParseError);
    const auto c = parse_config("# comment\n\nsurface = glass_slide\nT0 = 8.7, 300\nn_max = 3\n");
    CHECK(c.surfaces == std::vector<std::string>{"glass_slide"});
    CHECK(c.temperatures == std::vector<double>{8.7, 300.0});
    CHECK(parse_config("T0 = 8.7\nT0 = 50\n").temperatures == std::vector<double>{50.0});
}

TEST_CASE("resolution fills defaults and checks surfaces") {
    RunConfig c;
    c.presets = std::string(QREFLECT_SOURCE_DIR) + "/core/data/surfaces.json";
    CHECK_THROWS_AS(resolve_for_scan(c), UsageError);
    c.surfaces = {"glass_slide"};
    const auto s = resolve_for_scan(c);
    CHECK(s.temperatures == std::vector<double>{8.7, 50.0, 300.0});
    CHECK(*s.angles == kDefaultScanAngles);
    CHECK(*resolve_for_verify(c).angles == kDefaultVerifyAngles);
    c.surfaces = {"quartz"};
    CHECK_THROWS_AS(resolve_for_scan(c), UsageError);
    c.custom = SurfacePreset{"quartz", 0.5, 3.5e-50, 93.0, {}, {}};
    CHECK_NOTHROW(resolve_for_scan(c));
    CHECK(resolve_presets(c).front().name == "quartz");
}

TEST_CASE("scan csv layout") {
    CHECK(scan_columns(true, 10) ==
          std::vector<std::string>{"theta_grazing_mrad", "k_perp_nm_inv", "p_qr", "I_0"});
    CHECK(scan_columns(false, 2) ==
          std::vector<std::string>{"theta_grazing_mrad", "k_perp_nm_inv", "p_qr", "I_0", "I_+1",
                                   "I_-1", "I_+2", "I_-2"});
    CHECK(scan_file_name("glass_slide", 8.7) == "glass_slide_T8.7K.csv");
    CHECK(scan_file_name("structured_cr", 300.0) == "structured_cr_T300K.csv");

    RunConfig c;
    c.surfaces = {"structured_cr"};
    c.temperatures = {300.0};
    c.angles = AngleSpec{1.0, 2.0, 2, false};
    c.n_max = 2;
    c.presets = std::string(QREFLECT_SOURCE_DIR) + "/core/data/surfaces.json";
    const auto surface = make_surface(resolve_presets(c).front(), 2);
    const auto scan = run_scan(surface, BeamSource::from_temperature(300.0), c.angles->radians(),
                               c.absorber, c.grid, 1);
    const auto text = format_scan_csv(scan, surface, c);

    std::istringstream in(text);
    std::string line, echoed;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto body = line.substr(2);
            if (body.find(" = ") != std::string::npos && body.rfind("D_meV", 0) != 0 &&
                body.rfind("z_bar_A", 0) != 0 && body.rfind("k_i_nm_inv", 0) != 0) {
                echoed += body + "\n";
            }
        } else if (!line.empty() && line[0] != '#') {
            rows.push_back(line);
        }
    }
    CHECK(parse_config(echoed) == c);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "theta_grazing_mrad,k_perp_nm_inv,p_qr,I_0,I_+1,I_-1,I_+2,I_-2");
    std::vector<double> cells;
    std::istringstream row(rows[1]);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(std::stod(cell));
    REQUIRE(cells.size() == 8);
    const auto& r = scan.records[0];
    CHECK(cells[0] == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(cells[2] == doctest::Approx(r.p_qr).epsilon(1e-11));
    CHECK(cells[3] == doctest::Approx(r.intensity(0)).epsilon(1e-11));
    // I_+1 is experimental order +1, theory index -1
    CHECK(cells[4] == doctest::Approx(r.intensity(-1)).epsilon(1e-11));
    CHECK(cells[5] == doctest::Approx(r.intensity(1)).epsilon(1e-11));
    CHECK(cells[3] + cells[4] + cells[5] + cells[6] + cells[7] ==
          doctest::Approx(r.p_qr).epsilon(1e-10));
}

TEST_CASE("exit codes") {
    CHECK(run_cli("--help").status == 0);
    CHECK(run_cli("").status == 2);
    CHECK(run_cli("scan --bogus").status == 2);
    CHECK(run_cli("scan --surface glass_slide --angles 1:40:3log " + presets_arg()).status == 2);
    const auto unknown = run_cli("scan --surface quartz " + presets_arg());
    CHECK(unknown.status == 2);
    CHECK(unknown.output.find("glass_slide") != std::string::npos);
    CHECK(run_cli("fit-sigma /nonexistent/a.csv /nonexistent/b.csv").status == 1);
}

TEST_CASE("scan writes one file per surface and temperature") {
    const auto dir = scratch("scan");
    const auto r = run_cli("scan --surface glass_slide --surface flat_cr --T0 50 --T0 300 "
                           "--angles 0.5:5:4log --out " + dir.string() + " " + presets_arg());
    REQUIRE_MESSAGE(r.status == 0, r.output);
    for (const char* name : {"glass_slide_T50K.csv", "glass_slide_T300K.csv", "flat_cr_T50K.csv",
                             "flat_cr_T300K.csv"}) {
        CHECK_MESSAGE(fs::exists(dir / name), name);
    }
    const auto text = read_file(dir / "glass_slide_T50K.csv");
    CHECK(text.find("theta_grazing_mrad,k_perp_nm_inv,p_qr,I_0\n") != std::string::npos);
    CHECK(text.find("# T0 = 50") != std::string::npos);

    // same result regardless of the worker count
    const auto dir1 = scratch("scan1");
    const auto r1 = run_cli("scan --surface glass_slide --T0 50 --angles 0.5:5:4log --out " +
                            dir1.string() + " " + presets_arg());
    REQUIRE(r1.status == 0);
    const std::string env = "QREFLECT_THREADS=1 ";
    const auto dir2 = scratch("scan2");
    const std::string cmd = env + QREFLECT_CLI_PATH + " scan --surface glass_slide --T0 50 " +
                            "--angles 0.5:5:4log --out " + dir2.string() + " " + presets_arg() +
                            " > /dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    auto strip_out = [](std::string t) {
        const auto p = t.find("# out = ");
        return t.erase(p, t.find('\n', p) - p);
    };
    CHECK(strip_out(read_file(dir1 / "glass_slide_T50K.csv")) ==
          strip_out(read_file(dir2 / "glass_slide_T50K.csv")));
}

TEST_CASE("config file drives the scan") {
    const auto dir = scratch("config");
    RunConfig c;
    c.surfaces = {"mine"};
    c.temperatures = {50.0};
    c.angles = AngleSpec{1.0, 2.0, 2, true};
    c.out = dir.string();
    c.presets = std::string(QREFLECT_SOURCE_DIR) + "/core/data/surfaces.json";
    c.custom = SurfacePreset{"mine", 0.5, 4e-50, 93.0, {}, {}};
    std::ofstream(dir / "run.cfg") << emit_config(c);
    const auto r = run_cli("scan --config " + (dir / "run.cfg").string());
    REQUIRE_MESSAGE(r.status == 0, r.output);
    CHECK(fs::exists(dir / "mine_T50K.csv"));
    const auto printed = run_cli("scan --config " + (dir / "run.cfg").string() + " --print-config");
    CHECK(printed.status == 0);
    CHECK(parse_config(printed.output) == c);
}

TEST_CASE("fit-sigma") {
    const auto dir = scratch("sigma");
    std::ofstream(dir / "theory.csv")
        << "# qreflect scan\ntheta_grazing_mrad,k_perp_nm_inv,p_qr,I_0\n"
           "1,0.1,0.9,0.9\n2,0.2,0.8,0.8\n3,0.3,0.7,0.7\n4,0.4,0.6,0.6\n";
    std::ofstream(dir / "exp.csv") << "k_perp_nm_inv,probability\n0.1,1.0\n0.2,0.8\n";
    const auto r = run_cli("fit-sigma " + (dir / "theory.csv").string() + " " +
                           (dir / "exp.csv").string());
    REQUIRE_MESSAGE(r.status == 0, r.output);
    CHECK(r.output.find("sigma = 0.0707106781") != std::string::npos);
    CHECK(r.output.find("points = 2") != std::string::npos);

    std::ofstream(dir / "far.csv") << "k_perp_nm_inv,probability\n5,0.1\n6,0.05\n";
    const auto far = run_cli("fit-sigma " + (dir / "theory.csv").string() + " " +
                             (dir / "far.csv").string());
    CHECK(far.status == 1);
    CHECK(far.output.find("disjoint") != std::string::npos);
}

TEST_CASE("verify reports every gate as json") {
    const auto r = run_cli("verify --surface glass_slide --T0 300 --angles 2:3:1log " + presets_arg());
    const auto start = r.output.find('{');
    REQUIRE_MESSAGE(start != std::string::npos, r.output);
    const auto doc = nlohmann::json::parse(r.output.substr(start));
    std::vector<std::string> names;
    bool all = true;
    for (const auto& g : doc.at("gates")) {
        names.push_back(g.at("name").get<std::string>());
        all = all && g.at("passed").get<bool>();
    }
    CHECK(names == std::vector<std::string>{"unitarity", "subunitarity", "absorber_independence",
                                            "grid_convergence", "channel_convergence"});
    CHECK(doc.at("passed").get<bool>() == all);
    CHECK(r.status == (all ? 0 : 1));
    CHECK(doc.at("gates")[0].at("passed").get<bool>());

    const auto off = run_cli("verify --surface glass_slide --T0 300 --angles 2:3:1log --no-absorber " +
                             presets_arg());
    CHECK(off.status == 1);
    CHECK(off.output.find("absorber disabled") != std::string::npos);
}

}

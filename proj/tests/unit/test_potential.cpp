#include "oracle.hpp"

#include <qreflect/errors.hpp>
#include <qreflect/potential.hpp>
#include <qreflect/units.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qreflect;

namespace {

constexpr double kChi = 0.5;
constexpr double kL = 93.0;

// regression values for the glass-slide parameters, agreed with the oracle below
constexpr double kGlassZBar = 6.265851078897158;
constexpr double kGlassDepth = 9.755576560197397;

SurfacePotential glass() {
    return SurfacePotential::from_matching(kChi, units::c3_to_internal(3.5e-50), kL);
}

} // namespace

TEST_SUITE("potential") {

TEST_CASE("matching agrees with the dense-grid oracle") {
    const double c3 = units::c3_to_internal(3.5e-50);
    const auto ref = oracle::match(kChi, c3, kL);
    REQUIRE(ref.roots == 1);
    const auto m = solve_matching(kChi, c3, kL);
    CHECK(m.z_bar == doctest::Approx(ref.z_bar).epsilon(1e-11));
    CHECK(m.d_well == doctest::Approx(ref.depth).epsilon(1e-10));
    CHECK(m.z_bar == doctest::Approx(kGlassZBar).epsilon(1e-11));
    CHECK(m.d_well == doctest::Approx(kGlassDepth).epsilon(1e-10));
}

TEST_CASE("well depths of the glass and wafer presets") {
    const auto thin = solve_matching(kChi, units::c3_to_internal(3.5e-50), kL);
    const auto thick = solve_matching(kChi, units::c3_to_internal(5.5e-50), kL);
    CHECK(thin.d_well == doctest::Approx(9.8).epsilon(0.05));
    CHECK(thick.d_well == doctest::Approx(15.3).epsilon(0.05));
    // z_bar depends on (chi, l) only; D scales with C3
    CHECK(thick.z_bar == doctest::Approx(thin.z_bar).epsilon(1e-12));
    CHECK(thick.d_well / thin.d_well == doctest::Approx(5.5 / 3.5).epsilon(1e-12));
}

TEST_CASE("matching residuals on random parameter sets") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> chi(0.3, 1.0), c3(1.0, 10.0), l(30.0, 300.0);
    for (int i = 0; i < 12; ++i) {
        const double x = chi(rng), c = units::c3_to_internal(c3(rng) * 1e-50), ll = l(rng);
        const auto p = SurfacePotential::from_matching(x, c, ll);
        CHECK(std::abs(p.morse(p.z_bar) - p.casimir(p.z_bar)) < 1e-10);
        CHECK(std::abs(p.morse_derivative(p.z_bar) - p.casimir_derivative(p.z_bar)) < 1e-10);
        CHECK(p.c4 == p.c3 * p.l);
        CHECK(p.z_bar > 0.0);
        CHECK(p.d_well > 0.0);
        const auto ref = oracle::match(x, c, ll, 20000);
        CHECK(ref.roots == 1);
        CHECK(p.z_bar == doctest::Approx(ref.z_bar).epsilon(1e-10));
        CHECK(p.d_well == doctest::Approx(ref.depth).epsilon(1e-9));
    }
}

TEST_CASE("matching failures are diagnosed") {
    CHECK_THROWS_AS(solve_matching(0.0, 200.0, 93.0), DomainError);
    CHECK_THROWS_AS(solve_matching(0.5, -1.0, 93.0), DomainError);
    CHECK_THROWS_AS(solve_matching(0.5, 200.0, 0.0), DomainError);
    // a very soft Morse core matches far outside the bracket
    try {
        solve_matching(0.01, 200.0, 93.0);
        FAIL("expected a MatchingError");
    } catch (const MatchingError& e) {
        CHECK(std::string(e.what()).find("(0.1, 50)") != std::string::npos);
    }
}

TEST_CASE("potential shape") {
    const auto p = glass();
    CHECK(v_perp(0.0, p) == -p.d_well);
    CHECK(p.value(p.z_bar - 1e-12) == doctest::Approx(p.value(p.z_bar)).epsilon(1e-10));
    CHECK(std::abs(p.morse(p.z_bar) - p.casimir(p.z_bar)) < 1e-10);
    // tail at the grid edge
    const double tail = std::abs(p.value(2000.0));
    CHECK(tail == doctest::Approx(p.c4 / (2093.0 * 8e9)).epsilon(1e-12));
    CHECK(tail < 1e-8);
    // attractive everywhere right of the origin, Morse zero at -ln2/chi
    for (double z = 1e-3; z < 2000.0; z *= 1.05) CHECK(p.value(z) < 0.0);
    CHECK(std::abs(p.morse(-std::log(2.0) / kChi)) < 1e-12);
}

TEST_CASE("fourier coefficients of the strip profile") {
    const Grating g{1e5, 2e5};
    CHECK(fourier_coefficient(0, g) == 0.5);
    CHECK(fourier_coefficient(2, g) == 0.0);
    CHECK(fourier_coefficient(1, g) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-15));
    for (int n = 1; n < 40; ++n) {
        CHECK(fourier_coefficient(n, g) == fourier_coefficient(-n, g));
        if (n % 2 == 0) CHECK(fourier_coefficient(n, g) == 0.0);
    }
    // partial sums of c_n^2 rise monotonically towards the mean of h^2 = a/d
    const Grating h{0.3, 1.0};
    double sum = fourier_coefficient(0, h) * fourier_coefficient(0, h);
    for (int n = 1; n <= 10000; ++n) {
        const double next = sum + 2.0 * std::pow(fourier_coefficient(n, h), 2);
        CHECK(next >= sum);
        sum = next;
    }
    CHECK(sum <= 0.3);
    CHECK(sum == doctest::Approx(0.3).epsilon(1e-4));
}

TEST_CASE("coupling conventions") {
    for (auto conv : {CouplingConvention::fourier, CouplingConvention::normalized,
                      CouplingConvention::doubled_sinc}) {
        const Grating g{1e5, 2e5, 10, conv};
        CHECK(coupling_strength(0, g) == 1.0);
        CHECK(coupling_convention_from_string(to_string(conv)) == conv);
    }
    const double pi = std::numbers::pi;
    CHECK(coupling_strength(1, Grating{1e5, 2e5, 10, CouplingConvention::doubled_sinc}) ==
          doctest::Approx(4.0 / pi).epsilon(1e-14));
    CHECK(coupling_strength(1, Grating{1e5, 2e5, 10, CouplingConvention::normalized}) ==
          doctest::Approx(2.0 / pi).epsilon(1e-14));
    CHECK(coupling_strength(1, Grating{1e5, 2e5, 10, CouplingConvention::fourier}) ==
          doctest::Approx(1.0 / pi).epsilon(1e-14));
    CHECK_THROWS_AS(coupling_convention_from_string("bogus"), DomainError);

    const auto table = coupling_strengths(Grating{1e5, 2e5}, 20);
    REQUIRE(table.size() == 21);
    CHECK(table[0] == 1.0);
}

TEST_CASE("high-order couplings are small") {
    for (int n = 7; n < 200; n += 2) {
        CHECK(std::abs(coupling_strength(n, Grating{1e5, 2e5, 10, CouplingConvention::fourier})) < 0.1);
        CHECK(std::abs(coupling_strength(n, Grating{1e5, 2e5, 10, CouplingConvention::normalized})) < 0.1);
        // the doubled convention only drops below 0.1 from n = 13 on
        const double doubled =
            std::abs(coupling_strength(n, Grating{1e5, 2e5, 10, CouplingConvention::doubled_sinc}));
        CHECK(doubled == doctest::Approx(4.0 / (std::numbers::pi * n)).epsilon(1e-12));
    }
}

TEST_CASE("grating validation") {
    CHECK_NOTHROW((Grating{1.0, 2.0}.validate()));
    CHECK_THROWS_AS((Grating{2.0, 2.0}.validate()), DomainError);
    CHECK_THROWS_AS((Grating{0.0, 2.0}.validate()), DomainError);
    CHECK_THROWS_AS((Grating{1.0, 2.0, -1}.validate()), DomainError);
}

TEST_CASE("woods-saxon absorber") {
    const AbsorberParams w{-5.0, 2.0, -5.0};
    CHECK(woods_saxon(w.z_i, w, kChi) == -2.5);
    CHECK(woods_saxon(w.z_i - 10.0 / (w.alpha * kChi), w, kChi) ==
          doctest::Approx(-5.0 / (1.0 + std::exp(-10.0))).epsilon(1e-15));
    CHECK(woods_saxon(1e6, w, kChi) == 0.0);
    CHECK(woods_saxon(-1e6, w, kChi) == -5.0);
    double prev = woods_saxon(-50.0, w, kChi);
    for (double z = -49.0; z < 50.0; z += 1.0) {
        const double v = woods_saxon(z, w, kChi);
        CHECK(v >= prev);
        prev = v;
    }
    AbsorberParams off = w;
    off.enabled = false;
    CHECK(woods_saxon(-10.0, off, kChi) == 0.0);
    CHECK_THROWS_AS((AbsorberParams{-5.0, 0.0, 0.0}.validate()), DomainError);
}

}

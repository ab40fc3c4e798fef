#include "oracle.hpp"

#include <qreflect/channels.hpp>
#include <qreflect/errors.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace qreflect;

namespace {
constexpr double kPeriod = 2e5; // 20 um in Angstrom
}

TEST_SUITE("channels") {

TEST_CASE("angle conventions") {
    CHECK(grazing_to_normal(0.01) == doctest::Approx(std::numbers::pi / 2 - 0.01).epsilon(1e-15));
    CHECK(normal_to_grazing(grazing_to_normal(0.3)) == doctest::Approx(0.3).epsilon(1e-15));
    const auto c = ScatteringConditions::from_normal(1.0, 0.2, kPeriod);
    CHECK(c.theta_grazing() == doctest::Approx(std::numbers::pi / 2 - 0.2).epsilon(1e-15));
    CHECK_THROWS_AS(ScatteringConditions::from_grazing(0.0, 0.01), DomainError);
    CHECK_THROWS_AS(ScatteringConditions::from_grazing(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(ScatteringConditions::from_grazing(1.0, 2.0), DomainError);
}

TEST_CASE("specular perpendicular wave vector") {
    for (double th : {1e-4, 5e-3, 0.025, 0.7}) {
        const auto c = ScatteringConditions::from_grazing(11.2, th, kPeriod);
        const double cos_n = std::cos(grazing_to_normal(th));
        CHECK(kz_squared(0, c) == doctest::Approx(11.2 * 11.2 * cos_n * cos_n).epsilon(1e-12));
    }
}

TEST_CASE("first order at 300 K, 5 mrad, 20 um period") {
    const auto c = ScatteringConditions::from_grazing(11.2, 5e-3, kPeriod);
    for (int n : {1, -1, 3, -7}) {
        CHECK(kz_squared(n, c) == doctest::Approx(oracle::kz2_direct(11.2, 5e-3, kPeriod, n)).epsilon(1e-12));
    }
}

TEST_CASE("high orders close") {
    const auto c = ScatteringConditions::from_grazing(1.8, 1e-3, kPeriod);
    const double g = 2.0 * std::numbers::pi / kPeriod;
    // k sin(theta) + n G > k needs n G > k (1 - cos theta_g) ~ k theta^2 / 2
    const int n_close = static_cast<int>(std::ceil(1.8 * 0.5e-6 / g)) + 1;
    CHECK(kz_squared(n_close, c) < 0.0);
    CHECK(kz_squared(-n_close, c) > 0.0);
}

TEST_CASE("flat surfaces have only the specular channel") {
    const auto c = ScatteringConditions::from_grazing(1.8, 1e-3);
    CHECK_THROWS_AS(kz_squared(1, c), KinematicsError);
    const auto set = build_channel_set(c, 10);
    REQUIRE(set.size() == 1);
    CHECK(set.indices[0] == 0);
    CHECK(set.open[0]);
    CHECK_THROWS_AS(bragg_angle(1, c), KinematicsError);
}

TEST_CASE("five channels with flags from the sign of kz^2") {
    const auto c = ScatteringConditions::from_grazing(1.8, 2e-4, kPeriod);
    const auto set = build_channel_set(c, 2);
    REQUIRE(set.size() == 5);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const double ref = oracle::kz2_direct(1.8, 2e-4, kPeriod, set.indices[i]);
        CHECK(set.open[i] == (ref > 0.0));
        CHECK(set.kz2[i] == doctest::Approx(ref).epsilon(1e-10));
    }
    CHECK(set.indices[set.specular_position()] == 0);
    CHECK(set.open_count() == static_cast<std::size_t>(std::count(set.open.begin(), set.open.end(), true)));
}

TEST_CASE("normal incidence opens all low orders symmetrically") {
    const auto c = ScatteringConditions::from_normal(1.8, 0.0, kPeriod);
    const auto set = build_channel_set(c, 5);
    CHECK(set.open_count() == 11);
    for (int n = 1; n <= 5; ++n) CHECK(kz_squared(n, c) == kz_squared(-n, c));
}

TEST_CASE("energy conservation in every channel") {
    for (double th : {1e-4, 3e-3, 0.02}) {
        const auto c = ScatteringConditions::from_grazing(4.6, th, kPeriod);
        const auto set = build_channel_set(c, 10);
        for (std::size_t i = 0; i < set.size(); ++i) {
            const double par = parallel_momentum(set.indices[i], c);
            CHECK(std::abs(set.kz2[i] + par * par - 4.6 * 4.6) < 1e-12 * 4.6 * 4.6);
        }
    }
}

TEST_CASE("bragg angles") {
    const auto c = ScatteringConditions::from_grazing(11.2, 5e-3, kPeriod);
    CHECK(bragg_angle(0, c) == c.theta_grazing());
    CHECK(bragg_angle(-1, c) < c.theta_grazing());
    CHECK(bragg_angle(1, c) > c.theta_grazing());
    // agreement with the wave-vector components of the matching theory channel
    const auto set = build_channel_set(c, 10);
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (!set.open[i]) continue;
        const int m = experimental_order(set.indices[i]);
        const double from_k = std::asin(std::sqrt(set.kz2[i]) / c.k_i());
        CHECK(std::abs(bragg_angle(m, c) - from_k) < 1e-10);
        const double from_arccos =
            std::acos(std::cos(c.theta_grazing()) - m * c.reciprocal_vector() / c.k_i());
        CHECK(std::abs(bragg_angle(m, c) - from_arccos) < 1e-6);
    }
    const auto grazing = ScatteringConditions::from_grazing(1.8, 1e-4, kPeriod);
    CHECK_THROWS_AS(bragg_angle(-5, grazing), KinematicsError);
}

TEST_CASE("order sign convention") {
    CHECK(experimental_order(3) == -3);
    CHECK(theory_index(-2) == 2);
    static_assert(theory_index(experimental_order(7)) == 7);
}

}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "magbeam/geometry.hpp"

using namespace magbeam;
using Eigen::Vector3d;

namespace {

Loop make_loop(const Vector3d& center, const Vector3d& axis, double radius,
               int turns = 1, double wire_radius = 1e-3) {
    Loop l;
    l.center = center;
    l.axis = axis.normalized();
    l.radius = radius;
    l.turns = turns;
    l.wire_radius = wire_radius;
    return l;
}

} // namespace

TEST_CASE("complete elliptic integrals") {
    CHECK(elliptic_k(0.0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
    CHECK(elliptic_e(0.0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
    CHECK(elliptic_k(0.5) == doctest::Approx(1.6857503548125963).epsilon(1e-13));
    CHECK(elliptic_e(0.5) == doctest::Approx(1.4674622093394272).epsilon(1e-13));
    // Legendre relation E K' + E' K - K K' = pi/2 at k = 0.3.
    const double k = 0.3, kp = std::sqrt(1.0 - k * k);
    CHECK(elliptic_e(k) * elliptic_k(kp) + elliptic_e(kp) * elliptic_k(k) -
              elliptic_k(k) * elliptic_k(kp) ==
          doctest::Approx(std::numbers::pi / 2).epsilon(1e-13));
    CHECK_THROWS_AS(elliptic_k(1.0), DegenerateGeometry);
    CHECK_THROWS_AS(elliptic_e(-0.1), DegenerateGeometry);
}

TEST_CASE("coaxial mutual inductance closed form") {
    CHECK(mutual_inductance_coaxial(0.1, 0.1, 0.1) ==
          doctest::Approx(4.9407846307982733e-8).epsilon(1e-12));
    CHECK(mutual_inductance_coaxial(0.15, 0.1, 0.2) ==
          doctest::Approx(2.4812820193765524e-8).epsilon(1e-12));
    CHECK(mutual_inductance_coaxial(0.05, 0.05, 0.02) ==
          doctest::Approx(6.753694369741879e-8).epsilon(1e-12));
    // Symmetric in the radii.
    CHECK(mutual_inductance_coaxial(0.1, 0.15, 0.2) ==
          mutual_inductance_coaxial(0.15, 0.1, 0.2));
    CHECK_THROWS_AS(mutual_inductance_coaxial(0.1, 0.1, 0.0), DegenerateGeometry);
    CHECK_THROWS_AS(mutual_inductance_coaxial(-0.1, 0.1, 0.1), DegenerateGeometry);
}

TEST_CASE("quadrature matches the coaxial closed form") {
    const Loop a = make_loop({0, 0, 0}, {0, 0, 1}, 0.1);
    const Loop b = make_loop({0, 0, 0.1}, {0, 0, 1}, 0.1);
    const double m = mutual_inductance_neumann(a, b);
    CHECK(m == doctest::Approx(mutual_inductance_coaxial(0.1, 0.1, 0.1)).epsilon(1e-8));
}

TEST_CASE("tilted offset pair against a frozen reference") {
    const Loop a = make_loop({0, 0, 0}, {0, 0, 1}, 0.1);
    const Loop b = make_loop({0.05, 0.02, 0.15}, {0.2, 0.1, 0.97}, 0.08);
    CHECK(mutual_inductance_neumann(a, b) ==
          doctest::Approx(1.5944930208247685e-8).epsilon(1e-6));
}

TEST_CASE("perpendicular loop on the axis has zero coupling") {
    const Loop a = make_loop({0, 0, 0}, {0, 0, 1}, 0.1);
    const Loop b = make_loop({0, 0, 0.2}, {1, 0, 0}, 0.05);
    CHECK(std::abs(mutual_inductance_neumann(a, b)) < 1e-15);
}

TEST_CASE("turns scaling") {
    const Loop a = make_loop({0, 0, 0}, {0, 0, 1}, 0.1);
    const Loop b1 = make_loop({0, 0, 0.1}, {0, 0, 1}, 0.1);
    const Loop b3 = make_loop({0, 0, 0.1}, {0, 0, 1}, 0.1, 3);
    CHECK(mutual_inductance_neumann(a, b3) ==
          doctest::Approx(3.0 * mutual_inductance_neumann(a, b1)).epsilon(1e-14));
}

TEST_CASE("reciprocity is exact and axis flip negates the sign") {
    const Loop a = make_loop({0, 0, 0}, {0, 0, 1}, 0.1);
    const Loop b = make_loop({0.05, 0.02, 0.15}, {0.2, 0.1, 0.97}, 0.08);
    CHECK(mutual_inductance_neumann(a, b) == mutual_inductance_neumann(b, a));

    Loop b_flipped = b;
    b_flipped.axis = -b.axis;
    CHECK(mutual_inductance_neumann(a, b_flipped) ==
          doctest::Approx(-mutual_inductance_neumann(a, b)).epsilon(1e-10));
}

TEST_CASE("geometry error conditions") {
    const Loop a = make_loop({0, 0, 0}, {0, 0, 1}, 0.1);
    SUBCASE("touching loops intersect") {
        const Loop b = make_loop({0, 0, 1e-4}, {0, 0, 1}, 0.1);
        CHECK_THROWS_AS(mutual_inductance_neumann(a, b), LoopsIntersect);
    }
    SUBCASE("near-touching pair needs more segments") {
        const Loop b = make_loop({0, 0, 0.0025}, {0, 0, 1}, 0.1, 1, 1e-4);
        Loop a_thin = a;
        a_thin.wire_radius = 1e-4;
        CHECK_THROWS_AS(mutual_inductance_neumann(a_thin, b, 64), QuadratureTooCoarse);
        CHECK_NOTHROW(mutual_inductance_neumann(a_thin, b, 2048));
    }
    SUBCASE("invalid loops are rejected") {
        Loop bad = a;
        bad.axis = {0, 0, 2};
        CHECK_THROWS_AS(mutual_inductance_neumann(a, bad), InvalidGeometry);
        bad = a;
        bad.radius = 0.0;
        CHECK_THROWS_AS(mutual_inductance_neumann(a, bad), InvalidGeometry);
        bad = a;
        bad.turns = 0;
        CHECK_THROWS_AS(mutual_inductance_neumann(a, bad), InvalidGeometry);
        CHECK_THROWS_AS(
            mutual_inductance_neumann(a, make_loop({0, 0, 0.2}, {0, 0, 1}, 0.1), 32),
            InvalidGeometry);  // too few segments
    }
}

TEST_CASE("self inductance of a thin circular loop") {
    CHECK(self_inductance_loop(0.1, 1e-3, 1) ==
          doctest::Approx(5.886856715424859e-7).epsilon(1e-13));
    CHECK(self_inductance_loop(0.15, 5e-4, 2) ==
          doctest::Approx(4.360448180108485e-6).epsilon(1e-13));
    CHECK_THROWS_AS(self_inductance_loop(1e-3, 1e-3, 1), InvalidGeometry);
    CHECK_THROWS_AS(self_inductance_loop(0.1, 0.0, 1), InvalidGeometry);
}

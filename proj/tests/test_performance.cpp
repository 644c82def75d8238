#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "airmatrix/performance.hpp"

using namespace airmatrix;

namespace {
const double kPi = std::acos(-1.0);
double rad(double degrees) { return degrees * kPi / 180.0; }

// Elevation angles of the two tilted link classes for a=20, h=40.
const double kCornerDiagAngle = std::atan2(40.0, std::sqrt(2.0) * 20.0);  // 54.7356 deg
const double kFaceDiagAngle = std::atan2(40.0, 20.0);                     // 63.4349 deg
}  // namespace

TEST_CASE("calibration closed form") {
    // Two power-limited operating points pin e and P_max:
    //   e = m*g*v_mv / (v_mh^3 - v_mv^3),  P_max = e*v_mh^3.
    const auto inspire = calibrate(3.44, 6.0, 26.0);
    CHECK_THAT(inspire.drag_factor, Catch::Matchers::WithinRel(0.011663, 1e-4));
    CHECK_THAT(inspire.power_max, Catch::Matchers::WithinRel(205.00, 1e-4));

    const auto phantom = calibrate(1.375, 3.0, 20.0);
    CHECK_THAT(phantom.drag_factor, Catch::Matchers::WithinRel(0.0050754, 1e-4));
    CHECK_THAT(phantom.power_max, Catch::Matchers::WithinRel(40.603, 1e-4));

    const auto mavic = calibrate(0.43, 4.0, 19.0);
    CHECK_THAT(mavic.drag_factor, Catch::Matchers::WithinRel(0.0024832, 1e-4));
    CHECK_THAT(mavic.power_max, Catch::Matchers::WithinRel(17.032, 1e-4));

    // Calibration identity holds exactly.
    const double vh3 = 26.0 * 26.0 * 26.0;
    CHECK_THAT(inspire.power_max,
               Catch::Matchers::WithinRel(inspire.drag_factor * vh3, 1e-9));
}

TEST_CASE("calibration rejects degenerate speed limits") {
    CHECK_THROWS_AS(calibrate(1.0, 10.0, 10.0), DegenerateSpeeds);
    CHECK_THROWS_AS(calibrate(1.0, 12.0, 10.0), DegenerateSpeeds);
    CHECK_THROWS_AS(calibrate(1.0, 0.0, 10.0), DegenerateSpeeds);
    CHECK_THROWS_AS(calibrate(0.0, 3.0, 10.0), DegenerateSpeeds);
}

TEST_CASE("max speed hits both defining limits exactly") {
    const auto perf = calibrate(1.375, 3.0, 20.0);
    CHECK(max_speed_at_angle(perf, 0.0) == 20.0);
    CHECK(max_speed_at_angle(perf, kPi / 2.0) == 3.0);
    CHECK(max_speed_at_angle(perf, -kPi / 2.0) == 3.0);
}

TEST_CASE("published tilt speeds are reproduced") {
    const auto phantom = calibrate(1.375, 3.0, 20.0);
    CHECK_THAT(max_speed_at_angle(phantom, kCornerDiagAngle),
               Catch::Matchers::WithinAbs(3.664, 0.005));
    CHECK_THAT(max_speed_at_angle(phantom, kFaceDiagAngle),
               Catch::Matchers::WithinAbs(3.350, 0.005));

    const auto mavic = calibrate(0.43, 4.0, 19.0);
    CHECK_THAT(max_speed_at_angle(mavic, kCornerDiagAngle),
               Catch::Matchers::WithinAbs(4.860, 0.01));
    CHECK_THAT(max_speed_at_angle(mavic, kFaceDiagAngle),
               Catch::Matchers::WithinAbs(4.455, 0.01));
}

TEST_CASE("speed model properties") {
    const auto perf = calibrate(1.375, 3.0, 20.0);
    std::mt19937_64 rng(7);

    SECTION("strictly decreasing in |phi|, bounded by the speed limits") {
        double prev = max_speed_at_angle(perf, 0.0);
        for (int n = 1; n <= 90; ++n) {
            const double v = max_speed_at_angle(perf, rad(n));
            CHECK(v < prev);
            CHECK(v >= perf.v_max_vertical - 1e-9);
            CHECK(v <= perf.v_max_horizontal + 1e-9);
            prev = v;
        }
    }

    SECTION("power identity at the returned speed") {
        for (int n = 0; n < 100; ++n) {
            const double phi = rng_range(rng, -kPi / 2.0, kPi / 2.0);
            const double v = max_speed_at_angle(perf, phi);
            const double power = perf.drag_factor * v * v * v +
                                 perf.mass_kg * kGravity * v * std::sin(std::abs(phi));
            CHECK_THAT(power, Catch::Matchers::WithinRel(perf.power_max, 1e-8));
        }
    }

    SECTION("climb/descent symmetry is exact") {
        for (int n = 0; n < 50; ++n) {
            const double phi = rng_range(rng, 0.0, kPi / 2.0);
            CHECK(max_speed_at_angle(perf, phi) == max_speed_at_angle(perf, -phi));
        }
    }
}

TEST_CASE("link speeds and times") {
    const GridSpec g{{0, 0, 0}, 20.0, 40.0, 4, 4, 3};
    const auto phantom = calibrate(1.375, 3.0, 20.0, "DJI Phantom 4");
    const auto axis = classify_link(1, 0, 0, g);
    const auto vertical = classify_link(0, 0, 1, g);
    const auto face = classify_link(1, 0, 1, g);
    const auto corner = classify_link(1, 1, 1, g);

    CHECK_THAT(link_speed(phantom, axis, 0.6), Catch::Matchers::WithinAbs(12.0, 1e-12));
    CHECK_THAT(link_speed(phantom, vertical, 0.6),
               Catch::Matchers::WithinAbs(1.8, 1e-12));
    CHECK_THAT(link_speed(phantom, corner, 1.0),
               Catch::Matchers::WithinAbs(3.664, 0.005));

    CHECK_THAT(link_time(phantom, axis, 1.0), Catch::Matchers::WithinAbs(1.000, 1e-9));
    CHECK_THAT(link_time(phantom, face, 1.0), Catch::Matchers::WithinAbs(13.351, 2e-3));
    CHECK_THAT(link_time(phantom, corner, 1.0),
               Catch::Matchers::WithinAbs(13.371, 2e-3));

    CHECK_THROWS_AS(link_speed(phantom, axis, 0.0), InvalidScale);
    CHECK_THROWS_AS(link_speed(phantom, axis, 1.5), InvalidScale);
}

TEST_CASE("default fleet") {
    const Fleet fleet = default_fleet();
    REQUIRE(fleet.size() == 4);
    CHECK(fleet.count("DJI Mavic Air") == 1);
    CHECK(fleet.count("Self-Built Drone") == 1);
    CHECK(fleet.count("DJI Phantom 4") == 1);
    CHECK(fleet.count("DJI Matrice 600 Pro") == 1);
    CHECK(fleet.at("DJI Phantom 4").mass_kg == 1.375);
    CHECK(fleet.at("DJI Matrice 600 Pro").v_max_vertical == 5.0);
}

#pragma once

#include <cmath>
#include <map>
#include <string>

#include "airmatrix/common.hpp"
#include "airmatrix/errors.hpp"
#include "airmatrix/grid.hpp"

namespace airmatrix {

// Point-mass speed model calibrated from manufacturer specs. In steady flight
// at elevation phi the propulsion power is
//
//     P(v, phi) = e*v^3 + m*g*v*sin(phi)
//
// (cubic drag term plus the climb-rate term). Both published speed limits are
// assumed power-limited, which pins the two unknowns:
//
//     P_max = e*v_mh^3                      (level flight, phi = 0)
//     P_max = e*v_mv^3 + m*g*v_mv           (vertical climb, phi = 90 deg)
//  =>     e = m*g*v_mv / (v_mh^3 - v_mv^3)
//
// Descent speeds are taken equal to climb speeds, and azimuth plays no role
// (drag and gravity are isotropic in the horizontal plane).
struct AircraftPerformance {
    std::string name;
    double mass_kg = 0.0;
    double v_max_vertical = 0.0;    // m/s
    double v_max_horizontal = 0.0;  // m/s
    double drag_factor = 0.0;       // e, kg/m
    double power_max = 0.0;         // W
};

inline AircraftPerformance calibrate(double mass_kg, double v_max_vertical,
                                     double v_max_horizontal,
                                     std::string name = {}) {
    if (!(mass_kg > 0.0))
        throw DegenerateSpeeds("calibrate: mass must be positive");
    if (!(v_max_vertical > 0.0) || !(v_max_horizontal > v_max_vertical))
        throw DegenerateSpeeds("calibrate: need v_max_horizontal > v_max_vertical > 0");
    AircraftPerformance p;
    p.name = std::move(name);
    p.mass_kg = mass_kg;
    p.v_max_vertical = v_max_vertical;
    p.v_max_horizontal = v_max_horizontal;
    const double vh3 = v_max_horizontal * v_max_horizontal * v_max_horizontal;
    const double vv3 = v_max_vertical * v_max_vertical * v_max_vertical;
    p.drag_factor = mass_kg * kGravity * v_max_vertical / (vh3 - vv3);
    p.power_max = p.drag_factor * vh3;
    return p;
}

// Maximum achievable speed along a straight path at elevation `phi`: the
// unique positive root of e*v^3 + m*g*sin|phi|*v = P_max. The root lies in
// [v_max_vertical, v_max_horizontal] by calibration, so bisection on that
// bracket always converges.
inline double max_speed_at_angle(const AircraftPerformance& perf, double phi) {
    const double s = std::clamp(std::sin(std::abs(phi)), 0.0, 1.0);
    if (s == 0.0) return perf.v_max_horizontal;
    if (s == 1.0) return perf.v_max_vertical;
    const double climb = perf.mass_kg * kGravity * s;
    const auto residual = [&](double v) {
        return perf.drag_factor * v * v * v + climb * v - perf.power_max;
    };
    double lo = perf.v_max_vertical;
    double hi = perf.v_max_horizontal;
    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        const double f = residual(mid);
        if (std::abs(f) <= 1e-10 * perf.power_max) break;
        if (f > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return mid;
}

inline double link_speed(const AircraftPerformance& perf, const LinkClass& link,
                         double scale) {
    if (!(scale > 0.0) || scale > 1.0)
        throw InvalidScale("link_speed: scale must be in (0, 1]");
    return scale * max_speed_at_angle(perf, link.elevation);
}

inline double link_time(const AircraftPerformance& perf, const LinkClass& link,
                        double scale) {
    return link.length / link_speed(perf, link, scale);
}

inline double link_time(const AircraftPerformance& perf, const LinkTableEntry& link,
                        double scale) {
    if (!(scale > 0.0) || scale > 1.0)
        throw InvalidScale("link_time: scale must be in (0, 1]");
    return link.length / (scale * max_speed_at_angle(perf, link.elevation));
}

using Fleet = std::map<std::string, AircraftPerformance>;

// The four stock aircraft types (mass, max vertical speed, max horizontal
// speed from the manufacturer spec sheets).
inline Fleet default_fleet() {
    Fleet f;
    const auto add = [&f](const char* name, double m, double vv, double vh) {
        f.emplace(name, calibrate(m, vv, vh, name));
    };
    add("DJI Mavic Air", 0.43, 4.0, 19.0);
    add("Self-Built Drone", 0.3, 4.0, 12.0);
    add("DJI Phantom 4", 1.375, 3.0, 20.0);
    add("DJI Matrice 600 Pro", 10.0, 5.0, 18.0);
    return f;
}

}  // namespace airmatrix

#pragma once

#include <cmath>

namespace wiom {

constexpr double kDegPerRad = 180.0 / M_PI;
constexpr double kRadPerDeg = M_PI / 180.0;

// Wraps a heading in degrees into [-180, 180).
inline double normalize_heading(double deg) {
    double g = std::fmod(deg + 180.0, 360.0);
    if (g < 0.0) g += 360.0;
    return g - 180.0;
}

// Wraps an angle in radians into [-pi, pi).
inline double normalize_angle(double rad) {
    double a = std::fmod(rad + M_PI, 2.0 * M_PI);
    if (a < 0.0) a += 2.0 * M_PI;
    return a - M_PI;
}

// Planar pose: local east/north coordinates in metres plus compass heading in
// degrees (0 = north, positive clockwise), stored normalized to [-180, 180).
struct Pose {
    double x_e = 0.0;
    double x_n = 0.0;
    double gamma = 0.0;

    Pose() = default;
    Pose(double e, double n, double heading_deg)
        : x_e(e), x_n(n), gamma(normalize_heading(heading_deg)) {}
};

// Compass bearing in radians of the vector (de, dn): 0 = north, clockwise positive.
inline double compass_bearing(double de, double dn) {
    return std::atan2(de, dn);
}

} // namespace wiom

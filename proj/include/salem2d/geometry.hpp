#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace salem2d {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double sup_norm(Vec2 v) { return std::max(std::fabs(v.x), std::fabs(v.y)); }
inline double euclid_norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

// e^{-2 pi i <k, theta>}
inline std::complex<double> character(Vec2 k, Vec2 theta) {
    const double ang = -2.0 * M_PI * dot(k, theta);
    return {std::cos(ang), std::sin(ang)};
}

} // namespace salem2d

#pragma once

// Small fixed-size planar linear algebra used throughout the library.
// Everything is value-semantic and constexpr-friendly; no external deps.

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

namespace parashoot {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double norm() const { return std::hypot(x, y); }
    constexpr double squared_norm() const { return x * x + y * y; }
    Vec2 normalized() const { const double n = norm(); return {x / n, y / n}; }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
// z-component of the 3D cross product; positive when b is ccw of a.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

inline double angle_of(const Vec2& v) { return std::atan2(v.y, v.x); }

// Angle in [0, 2pi), matching the convention used for path closure arcs.
inline double angle_in_2pi(const Vec2& v) {
    double a = std::atan2(v.y, v.x);
    if (a < 0.0) a += 2.0 * M_PI;
    return a;
}

inline Vec2 from_polar(double r, double theta) {
    return {r * std::cos(theta), r * std::sin(theta)};
}

// Complex view helpers; the Levi-Civita map treats the plane as C.
inline std::complex<double> to_complex(const Vec2& v) { return {v.x, v.y}; }
inline Vec2 to_vec(const std::complex<double>& z) { return {z.real(), z.imag()}; }

// Symmetric 2x2 matrix as used for potential Hessians.
struct Mat2 {
    double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;

    constexpr Mat2 operator+(const Mat2& o) const {
        return {xx + o.xx, xy + o.xy, yx + o.yx, yy + o.yy};
    }
    constexpr Mat2 operator*(double s) const { return {xx * s, xy * s, yx * s, yy * s}; }
    constexpr Vec2 operator*(const Vec2& v) const {
        return {xx * v.x + xy * v.y, yx * v.x + yy * v.y};
    }
    constexpr double trace() const { return xx + yy; }
    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 outer(const Vec2& a, const Vec2& b) {
        return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
    }
};

// Proper (transversal) intersection test for open segments ab and cd.
// Touching endpoints or collinear overlap do not count; the solver-facing
// checker wants genuine crossings only.
inline std::optional<Vec2> segment_crossing(const Vec2& a, const Vec2& b,
                                            const Vec2& c, const Vec2& d) {
    const Vec2 r = b - a;
    const Vec2 s = d - c;
    const double denom = cross(r, s);
    if (denom == 0.0) return std::nullopt;
    const Vec2 ca = c - a;
    const double t = cross(ca, s) / denom;
    const double u = cross(ca, r) / denom;
    if (t <= 0.0 || t >= 1.0 || u <= 0.0 || u >= 1.0) return std::nullopt;
    return a + r * t;
}

struct CrossingPair {
    std::size_t segment_a;
    std::size_t segment_b;
    Vec2 point;
};

// All transversal crossings between non-adjacent segments of a polyline.
// Sweep over x-sorted segment intervals; near-linear for solver outputs.
inline std::vector<CrossingPair> polyline_self_intersections(const std::vector<Vec2>& pts) {
    std::vector<CrossingPair> out;
    if (pts.size() < 4) return out;
    const std::size_t n = pts.size() - 1;

    struct Seg { double xmin, xmax; std::size_t i; };
    std::vector<Seg> segs(n);
    for (std::size_t i = 0; i < n; ++i) {
        segs[i] = {std::min(pts[i].x, pts[i + 1].x), std::max(pts[i].x, pts[i + 1].x), i};
    }
    std::sort(segs.begin(), segs.end(), [](const Seg& a, const Seg& b) { return a.xmin < b.xmin; });

    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (segs[b].xmin > segs[a].xmax) break;
            const std::size_t i = std::min(segs[a].i, segs[b].i);
            const std::size_t j = std::max(segs[a].i, segs[b].i);
            if (j - i <= 1) continue;  // adjacent segments share a vertex
            auto hit = segment_crossing(pts[i], pts[i + 1], pts[j], pts[j + 1]);
            if (hit) out.push_back({i, j, *hit});
        }
    }
    std::sort(out.begin(), out.end(), [](const CrossingPair& a, const CrossingPair& b) {
        return a.segment_a != b.segment_a ? a.segment_a < b.segment_a : a.segment_b < b.segment_b;
    });
    return out;
}

}  // namespace parashoot

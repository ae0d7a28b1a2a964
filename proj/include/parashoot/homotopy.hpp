#pragma once

// Winding-parity bookkeeping. Open Bolza paths are closed against the
// endpoint circle with a counterclockwise arc; the parity (mod 2) of the
// winding number of that closed curve around each centre labels the
// homotopy class the minimizer is constrained to.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "parashoot/error.hpp"
#include "parashoot/geometry.hpp"
#include "parashoot/potential.hpp"

namespace parashoot {

struct ParityClass {
    std::vector<std::uint8_t> bits;  // l_i in {0,1}, one per centre

    bool operator==(const ParityClass& o) const { return bits == o.bits; }

    // Admissible classes are non-constant: some pair of centres must be
    // distinguished, otherwise the class imposes nothing.
    bool admissible() const {
        for (std::size_t i = 1; i < bits.size(); ++i)
            if (bits[i] != bits[0]) return true;
        return false;
    }

    std::string to_string() const {
        std::string s;
        for (auto b : bits) s += b ? '1' : '0';
        return s;
    }
};

struct Partition {
    std::set<std::size_t> members;

    void validate(std::size_t n_centres) const {
        if (members.empty()) raise(errc::invalid_partition, "partition must be nonempty");
        for (auto i : members)
            if (i >= n_centres)
                raise(errc::invalid_partition, "partition index " + std::to_string(i) +
                                                   " out of range");
        if (members.size() == n_centres)
            raise(errc::invalid_partition, "partition must be proper (not all centres)");
    }
};

struct ClosedPolyline {
    std::vector<Vec2> vertices;  // first == last
};

inline ParityClass partition_to_class(const Partition& p, std::size_t n_centres) {
    p.validate(n_centres);
    ParityClass cls;
    cls.bits.assign(n_centres, 0);
    for (auto i : p.members) cls.bits[i] = 1;
    return cls;
}

namespace detail {
// Counterclockwise arc angles from theta_plus to theta_minus, both taken in
// [0, 2pi). The sweep is theta- - theta+ if that is positive, else + 2pi.
inline double closure_sweep(double theta_minus, double theta_plus) {
    double sweep = theta_minus - theta_plus;
    if (sweep <= 0.0) sweep += 2.0 * M_PI;
    return sweep;
}
}  // namespace detail

// Close an open polyline whose endpoints share a radius by appending the
// counterclockwise circle arc from the end point back to the start point.
inline ClosedPolyline close_polyline(const std::vector<Vec2>& path, std::size_t arc_nodes = 128) {
    if (path.size() < 2) raise(errc::domain, "path needs at least two vertices");
    const Vec2 q_minus = path.front();
    const Vec2 q_plus = path.back();
    const double r_minus = q_minus.norm();
    const double r_plus = q_plus.norm();
    if (std::abs(r_minus - r_plus) > 1e-9 * std::max(r_minus, r_plus))
        raise(errc::endpoint_mismatch, "endpoint radii differ beyond tolerance");
    if ((q_minus - q_plus).norm() <= 1e-12 * std::max(1.0, r_minus))
        raise(errc::endpoint_mismatch, "endpoints coincide; closure arc undefined");
    if (arc_nodes < 2) raise(errc::domain, "arc_nodes must be at least 2");

    const double theta_minus = angle_in_2pi(q_minus);
    const double theta_plus = angle_in_2pi(q_plus);
    const double sweep = detail::closure_sweep(theta_minus, theta_plus);

    ClosedPolyline out;
    out.vertices = path;
    for (std::size_t k = 1; k < arc_nodes; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(arc_nodes);
        out.vertices.push_back(from_polar(r_minus, theta_plus + sweep * f));
    }
    out.vertices.push_back(q_minus);  // exact closure
    return out;
}

// Winding number by exact signed-angle summation over the edges. The
// accumulated angle must land near a multiple of 2pi; a large residual means
// the query point is too close to the polyline for the answer to be trusted.
inline int winding_number(const ClosedPolyline& poly, const Vec2& point) {
    const auto& v = poly.vertices;
    if (v.size() < 4) raise(errc::domain, "closed polyline needs at least 3 edges");

    double scale = 0.0;
    for (const auto& p : v) scale = std::max(scale, (p - point).norm());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const Vec2 a = v[i] - point;
        const Vec2 b = v[i + 1] - point;
        const double na = a.norm();
        const double nb = b.norm();
        if (na <= 1e-9 * scale || nb <= 1e-9 * scale)
            raise(errc::point_on_path, "winding query point lies on the polyline");
        // distance from point to edge, to reject on-path queries robustly
        const Vec2 e = v[i + 1] - v[i];
        const double elen2 = e.squared_norm();
        if (elen2 > 0.0) {
            const double t = std::clamp(dot(point - v[i], e) / elen2, 0.0, 1.0);
            if ((point - (v[i] + e * t)).norm() <= 1e-9 * scale)
                raise(errc::point_on_path, "winding query point lies on the polyline");
        }
        total += std::atan2(cross(a, b), dot(a, b));
    }
    const double turns = total / (2.0 * M_PI);
    const double rounded = std::round(turns);
    if (std::abs(turns - rounded) >= 0.25)
        raise(errc::ill_conditioned,
              "winding residual " + std::to_string(std::abs(turns - rounded)) + " >= 0.25");
    return static_cast<int>(rounded);
}

// Parity bits of an open path: close it, then take each winding mod 2.
inline ParityClass parity_of_polyline(const std::vector<Vec2>& path, const ProblemConfig& cfg,
                                      std::size_t arc_nodes = 128) {
    const ClosedPolyline closed = close_polyline(path, arc_nodes);
    ParityClass cls;
    cls.bits.reserve(cfg.centre_count());
    for (const auto& c : cfg.centres()) {
        const int w = winding_number(closed, c.position);
        cls.bits.push_back(static_cast<std::uint8_t>(((w % 2) + 2) % 2));
    }
    return cls;
}

// True iff the parities of the path split the centres exactly along P:
// constant on P, constant on the complement, different across.
inline bool separates_polyline(const std::vector<Vec2>& path, const Partition& p,
                               const ProblemConfig& cfg, std::size_t arc_nodes = 128) {
    p.validate(cfg.centre_count());
    const ParityClass cls = parity_of_polyline(path, cfg, arc_nodes);
    const ParityClass target = partition_to_class(p, cfg.centre_count());
    ParityClass complement = target;
    for (auto& b : complement.bits) b ^= 1;
    return cls == target || cls == complement;
}

}  // namespace parashoot

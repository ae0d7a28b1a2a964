#pragma once

// Discrete Maupertuis functional
//
//   M(u) = ( sum_k |u_{k+1}-u_k|^2 / dt ) * ( quadrature of U along u )
//
// on uniform-grid polylines over [-1,1] with pinned endpoints, plus its
// exact gradient and the time-rescaling frequency omega.

#include <cmath>
#include <vector>

#include "parashoot/error.hpp"
#include "parashoot/geometry.hpp"
#include "parashoot/homotopy.hpp"
#include "parashoot/potential.hpp"

namespace parashoot {

class DiscretePath {
  public:
    // Nodes sit at t_k = -1 + 2k/M. Endpoints are fixed data of the Bolza
    // problem; they must share a radius and be distinct.
    explicit DiscretePath(std::vector<Vec2> nodes) : nodes_(std::move(nodes)) {
        if (nodes_.size() < 9) raise(errc::domain, "discrete path needs at least 8 segments");
        const double rm = nodes_.front().norm();
        const double rp = nodes_.back().norm();
        if (std::abs(rm - rp) > 1e-9 * std::max(rm, rp))
            raise(errc::endpoint_mismatch, "path endpoints must share a radius");
        if ((nodes_.front() - nodes_.back()).norm() <= 1e-12 * std::max(1.0, rm))
            raise(errc::endpoint_mismatch, "path endpoints must be distinct");
    }

    const std::vector<Vec2>& nodes() const { return nodes_; }
    std::vector<Vec2>& mutable_nodes() { return nodes_; }
    std::size_t segments() const { return nodes_.size() - 1; }
    double dt() const { return 2.0 / static_cast<double>(segments()); }
    const Vec2& q_minus() const { return nodes_.front(); }
    const Vec2& q_plus() const { return nodes_.back(); }

    double parameter_time(std::size_t k) const {
        return -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(segments());
    }

    // Double the resolution by inserting segment midpoints.
    DiscretePath refined() const {
        std::vector<Vec2> up;
        up.reserve(2 * nodes_.size() - 1);
        for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
            up.push_back(nodes_[k]);
            up.push_back((nodes_[k] + nodes_[k + 1]) * 0.5);
        }
        up.push_back(nodes_.back());
        return DiscretePath(std::move(up));
    }

  private:
    std::vector<Vec2> nodes_;
};

// Exact Dirichlet integral of the piecewise-linear interpolant.
inline double kinetic_integral(const DiscretePath& path) {
    const double dt = path.dt();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < path.nodes().size(); ++k)
        acc += (path.nodes()[k + 1] - path.nodes()[k]).squared_norm();
    return acc / dt;
}

namespace detail {

// Four midpoints per segment, everywhere. A proximity-switched rule would be
// cheaper far from the centres but makes the functional depend on the switch
// pattern, which the line search then trips over; a fixed rule keeps the
// discrete functional as smooth as U itself.
inline constexpr std::size_t kQuadPoints = 4;

inline double segment_quadrature(const ProblemConfig& cfg, const Vec2& a, const Vec2& b,
                                 double dt) {
    double acc = 0.0;
    for (std::size_t j = 0; j < kQuadPoints; ++j) {
        const double s = (static_cast<double>(j) + 0.5) / static_cast<double>(kQuadPoints);
        acc += eval_potential(cfg, a + (b - a) * s);
    }
    return acc * dt / static_cast<double>(kQuadPoints);
}

}  // namespace detail

inline double potential_integral(const DiscretePath& path, const ProblemConfig& cfg) {
    const double dt = path.dt();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < path.nodes().size(); ++k)
        acc += detail::segment_quadrature(cfg, path.nodes()[k], path.nodes()[k + 1], dt);
    return acc;
}

inline double maupertuis(const DiscretePath& path, const ProblemConfig& cfg) {
    return kinetic_integral(path) * potential_integral(path, cfg);
}

// Exact gradient of the discrete functional (product rule across both
// factors, quadrature pattern held fixed). Endpoint entries are zero.
inline std::vector<Vec2> maupertuis_gradient(const DiscretePath& path,
                                             const ProblemConfig& cfg) {
    const auto& u = path.nodes();
    const double dt = path.dt();
    const std::size_t n = u.size();

    std::vector<Vec2> grad_kin(n, Vec2{0, 0});
    std::vector<Vec2> grad_pot(n, Vec2{0, 0});

    const double w = dt / static_cast<double>(detail::kQuadPoints);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const Vec2 d = (u[k + 1] - u[k]) * (2.0 / dt);
        grad_kin[k] -= d;
        grad_kin[k + 1] += d;

        for (std::size_t j = 0; j < detail::kQuadPoints; ++j) {
            const double s =
                (static_cast<double>(j) + 0.5) / static_cast<double>(detail::kQuadPoints);
            const Vec2 g = eval_gradient(cfg, u[k] + (u[k + 1] - u[k]) * s) * w;
            grad_pot[k] += g * (1.0 - s);
            grad_pot[k + 1] += g * s;
        }
    }

    const double kin = kinetic_integral(path);
    const double pot = potential_integral(path, cfg);
    std::vector<Vec2> grad(n, Vec2{0, 0});
    for (std::size_t k = 1; k + 1 < n; ++k)
        grad[k] = grad_kin[k] * pot + grad_pot[k] * kin;
    return grad;
}

// omega = sqrt( int |u'|^2 / (2 int U) ); rescales [-1,1] to [-omega,omega].
inline double omega_of(const DiscretePath& path, const ProblemConfig& cfg) {
    const double kin = kinetic_integral(path);
    if (kin <= 0.0) raise(errc::degenerate_path, "constant path has no time rescaling");
    return std::sqrt(kin / (2.0 * potential_integral(path, cfg)));
}

inline ParityClass parity_class(const DiscretePath& path, const ProblemConfig& cfg,
                                std::size_t arc_nodes = 128) {
    return parity_of_polyline(path.nodes(), cfg, arc_nodes);
}

inline bool separates(const DiscretePath& path, const Partition& p, const ProblemConfig& cfg,
                      std::size_t arc_nodes = 128) {
    return separates_polyline(path.nodes(), p, cfg, arc_nodes);
}

}  // namespace parashoot

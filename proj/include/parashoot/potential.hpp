#pragma once

// The N-centre potential
//
//   U(x) = sum_i m_i / (alpha |x - c_i|^alpha),   alpha in [1,2),
//
// its gradient and Hessian, and the far-field split U = m/(alpha |x|^alpha) + W
// with m = sum_i m_i. All downstream modules consume the potential through
// these few functions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "parashoot/error.hpp"
#include "parashoot/geometry.hpp"

namespace parashoot {

struct Centre {
    Vec2 position;
    double mass = 1.0;
};

class ProblemConfig {
  public:
    ProblemConfig(double alpha, std::vector<Centre> centres,
                  double ring_radius = 0.0)
        : alpha_(alpha), centres_(std::move(centres)) {
        if (!(alpha_ >= 1.0 && alpha_ < 2.0))
            raise(errc::config, "alpha must lie in [1,2), got " + std::to_string(alpha_));
        if (centres_.empty())
            raise(errc::config, "need at least one centre");
        far_mass_ = 0.0;
        max_centre_norm_ = 0.0;
        for (const auto& c : centres_) {
            if (!(c.mass > 0.0)) raise(errc::config, "centre masses must be positive");
            far_mass_ += c.mass;
            max_centre_norm_ = std::max(max_centre_norm_, c.position.norm());
        }
        for (std::size_t i = 0; i < centres_.size(); ++i)
            for (std::size_t j = i + 1; j < centres_.size(); ++j)
                if ((centres_[i].position - centres_[j].position).norm() == 0.0)
                    raise(errc::config, "centre positions must be pairwise distinct");
        ring_radius_ = ring_radius > 0.0 ? ring_radius : max_centre_norm_ + 2.0;
        if (!(ring_radius_ > max_centre_norm_ + 1.0))
            raise(errc::config, "ring_radius must exceed max |c_i| + 1");
    }

    double alpha() const { return alpha_; }
    double decay_beta() const { return alpha_ + 1.0; }
    double far_mass() const { return far_mass_; }
    double ring_radius() const { return ring_radius_; }
    double max_centre_norm() const { return max_centre_norm_; }
    const std::vector<Centre>& centres() const { return centres_; }
    std::size_t centre_count() const { return centres_.size(); }

    // Smallest distance between two centres; +inf for a single centre.
    double min_centre_gap() const {
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < centres_.size(); ++i)
            for (std::size_t j = i + 1; j < centres_.size(); ++j)
                g = std::min(g, (centres_[i].position - centres_[j].position).norm());
        return g;
    }

    double singularity_threshold(std::size_t i) const {
        return 1e-12 * (1.0 + centres_[i].position.norm());
    }

  private:
    double alpha_;
    std::vector<Centre> centres_;
    double far_mass_ = 0.0;
    double ring_radius_ = 0.0;
    double max_centre_norm_ = 0.0;
};

// Smallest |x - c_i| and the attaining index; ties keep the lowest index.
inline std::pair<double, std::size_t> min_centre_distance(const ProblemConfig& cfg,
                                                          const Vec2& x) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t idx = 0;
    for (std::size_t i = 0; i < cfg.centres().size(); ++i) {
        const double d = (x - cfg.centres()[i].position).norm();
        if (d < best) {
            best = d;
            idx = i;
        }
    }
    return {best, idx};
}

namespace detail {
inline void check_off_centres(const ProblemConfig& cfg, const Vec2& x) {
    for (std::size_t i = 0; i < cfg.centres().size(); ++i) {
        if ((x - cfg.centres()[i].position).norm() < cfg.singularity_threshold(i))
            raise(errc::singularity, "evaluation point coincides with centre " + std::to_string(i));
    }
}
}  // namespace detail

inline double eval_potential(const ProblemConfig& cfg, const Vec2& x) {
    detail::check_off_centres(cfg, x);
    const double a = cfg.alpha();
    double u = 0.0;
    for (const auto& c : cfg.centres()) {
        const double r = (x - c.position).norm();
        u += c.mass / (a * std::pow(r, a));
    }
    return u;
}

// grad U(x) = -sum_i m_i (x - c_i) / |x - c_i|^(alpha+2)
inline Vec2 eval_gradient(const ProblemConfig& cfg, const Vec2& x) {
    detail::check_off_centres(cfg, x);
    const double a = cfg.alpha();
    Vec2 g{0.0, 0.0};
    for (const auto& c : cfg.centres()) {
        const Vec2 d = x - c.position;
        const double r = d.norm();
        g -= d * (c.mass / std::pow(r, a + 2.0));
    }
    return g;
}

inline Mat2 eval_hessian(const ProblemConfig& cfg, const Vec2& x) {
    detail::check_off_centres(cfg, x);
    const double a = cfg.alpha();
    Mat2 h{};
    for (const auto& c : cfg.centres()) {
        const Vec2 d = x - c.position;
        const double r = d.norm();
        const double rm = std::pow(r, a + 2.0);
        h = h + Mat2::outer(d, d) * (c.mass * (a + 2.0) / (rm * r * r)) +
            Mat2::identity() * (-c.mass / rm);
    }
    return h;
}

// W(x) = U(x) - m/(alpha |x|^alpha); defined outside the centre cluster.
inline double far_field_remainder(const ProblemConfig& cfg, const Vec2& x) {
    const double r = x.norm();
    if (r <= cfg.max_centre_norm())
        raise(errc::domain, "far-field remainder requires |x| > max |c_i|");
    return eval_potential(cfg, x) -
           cfg.far_mass() / (cfg.alpha() * std::pow(r, cfg.alpha()));
}

inline Vec2 far_field_remainder_gradient(const ProblemConfig& cfg, const Vec2& x) {
    const double r = x.norm();
    if (r <= cfg.max_centre_norm())
        raise(errc::domain, "far-field remainder requires |x| > max |c_i|");
    const Vec2 central = x * (-cfg.far_mass() / std::pow(r, cfg.alpha() + 2.0));
    return eval_gradient(cfg, x) - central;
}

struct FarFieldConstants {
    double remainder;  // sup |W(x)| |x|^beta over the scanned annulus
    double gradient;   // sup |grad W(x)| |x|^(beta+1)
};

// Empirical constants for the decay |W| <= C/|x|^beta, |grad W| <= C/|x|^(beta+1),
// obtained by scanning rays between the diagnostic ring and 100x its radius.
inline FarFieldConstants far_field_constant(const ProblemConfig& cfg,
                                            std::size_t rays = 16,
                                            std::size_t radial_samples = 64) {
    const double beta = cfg.decay_beta();
    const double r_lo = cfg.ring_radius();
    const double r_hi = 100.0 * cfg.ring_radius();
    FarFieldConstants out{0.0, 0.0};
    for (std::size_t k = 0; k < rays; ++k) {
        const double theta = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(rays);
        for (std::size_t j = 0; j < radial_samples; ++j) {
            const double f = static_cast<double>(j) / static_cast<double>(radial_samples - 1);
            const double r = r_lo * std::pow(r_hi / r_lo, f);
            const Vec2 x = from_polar(r, theta);
            out.remainder = std::max(out.remainder,
                                     std::abs(far_field_remainder(cfg, x)) * std::pow(r, beta));
            out.gradient = std::max(out.gradient,
                                    far_field_remainder_gradient(cfg, x).norm() *
                                        std::pow(r, beta + 1.0));
        }
    }
    return out;
}

}  // namespace parashoot

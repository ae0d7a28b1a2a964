#pragma once

// Levi-Civita regularization of near-collisions with one centre, for the
// Newtonian exponent only. With w^2 = x - c and fictitious time
// ds = dt/|x - c|, a zero-energy trajectory obeys
//
//   w'' = (w/2) U1(c + w^2) + (conj w / 2) |w|^2 grad U1(c + w^2),
//
// where U1 is the potential with the regularized centre's own term removed.
// The right side is smooth through w = 0, so collisions cost nothing.

#include <cmath>
#include <complex>
#include <vector>

#include "parashoot/error.hpp"
#include "parashoot/geometry.hpp"
#include "parashoot/potential.hpp"
#include "parashoot/rk45.hpp"
#include "parashoot/trajectory.hpp"

namespace parashoot {

struct LeviCivitaState {
    Vec2 w;                      // complex square root of x - c
    Vec2 w_prime;                // d w / d s
    double fictitious_time = 0;  // Sundman parameter s
    std::size_t centre_index = 0;
    double physical_time = 0;

    Vec2 position(const ProblemConfig& cfg) const {
        const auto z = to_complex(w);
        return cfg.centres()[centre_index].position + to_vec(z * z);
    }

    Vec2 velocity() const {
        const double rho = w.squared_norm();
        const auto v = 2.0 * to_complex(w) * to_complex(w_prime) / rho;
        return to_vec(v);
    }

    // |w'|^2 - m1/2 - |w|^2 U1 / 2; zero along exact zero-energy motion.
    double energy_invariant(const ProblemConfig& cfg) const;
};

namespace detail {

// Potential and gradient with centre `skip` removed (the regular part U1).
inline double regular_part(const ProblemConfig& cfg, const Vec2& x, std::size_t skip) {
    double u = 0.0;
    for (std::size_t i = 0; i < cfg.centre_count(); ++i) {
        if (i == skip) continue;
        const double r = (x - cfg.centres()[i].position).norm();
        if (r < cfg.singularity_threshold(i))
            raise(errc::singularity, "regular part evaluated on another centre");
        u += cfg.centres()[i].mass / r;  // alpha = 1
    }
    return u;
}

inline Vec2 regular_part_gradient(const ProblemConfig& cfg, const Vec2& x, std::size_t skip) {
    Vec2 g{0, 0};
    for (std::size_t i = 0; i < cfg.centre_count(); ++i) {
        if (i == skip) continue;
        const Vec2 d = x - cfg.centres()[i].position;
        const double r = d.norm();
        g -= d * (cfg.centres()[i].mass / (r * r * r));
    }
    return g;
}

}  // namespace detail

inline double LeviCivitaState::energy_invariant(const ProblemConfig& cfg) const {
    const double rho = w.squared_norm();
    const double m1 = cfg.centres()[centre_index].mass;
    const double u1 = detail::regular_part(cfg, position(cfg), centre_index);
    return w_prime.squared_norm() - 0.5 * m1 - 0.5 * rho * u1;
}

// Lift a Cartesian state into regularized variables. The half angle is taken
// from the [0, 2pi) branch here; during integration the branch evolves with
// the flow and is never re-derived.
inline LeviCivitaState levi_civita_lift(const State& state, std::size_t centre_index,
                                        const ProblemConfig& cfg) {
    if (cfg.alpha() != 1.0)
        raise(errc::wrong_alpha, "Levi-Civita regularization requires alpha = 1");
    if (centre_index >= cfg.centre_count()) raise(errc::domain, "centre index out of range");

    const Vec2 rel = state.position - cfg.centres()[centre_index].position;
    const double rho = rel.norm();
    if (rho <= 0.0) raise(errc::domain, "cannot lift a state sitting on the centre");

    const double phi = angle_in_2pi(rel);
    LeviCivitaState lc;
    lc.centre_index = centre_index;
    lc.physical_time = state.time;
    lc.fictitious_time = 0.0;
    lc.w = from_polar(std::sqrt(rho), 0.5 * phi);
    lc.w_prime = to_vec(0.5 * to_complex(state.velocity) * std::conj(to_complex(lc.w)));

    const double inv = lc.energy_invariant(cfg);
    if (std::abs(inv) > 1e-9 * std::max(1.0, cfg.centres()[centre_index].mass))
        raise(errc::domain, "lifted state is not parabolic: invariant " + std::to_string(inv));
    return lc;
}

inline State levi_civita_drop(const LeviCivitaState& lc, const ProblemConfig& cfg) {
    return {lc.physical_time, lc.position(cfg), lc.velocity()};
}

struct RegularizedOptions {
    double exit_radius = 0.0;    // stop when |x - c| crosses this from below (0 = off)
    double time_cap = 0.0;       // stop when physical time reaches this (0 = off)
    bool use_time_cap = false;
    std::size_t max_steps = 2'000'000;
    double min_emit_distance = 1e-12;  // skip samples closer to collision than this
    double max_step = 0.0;             // fictitious-time step ceiling (0 = automatic)
};

struct RegularizedRun {
    Trajectory segment;          // Cartesian view of the regularized pass
    LeviCivitaState end;
    bool hit_exit_radius = false;
    bool hit_time_cap = false;
    std::size_t rhs_evaluations = 0;
};

// Integrate the regularized equation over fictitious time. Samples are
// emitted in Cartesian form except in the immediate collision neighbourhood
// where the physical velocity is not representable.
inline RegularizedRun integrate_regularized(const LeviCivitaState& start, double s_span,
                                            double tol, const ProblemConfig& cfg,
                                            const RegularizedOptions& options = {}) {
    if (cfg.alpha() != 1.0)
        raise(errc::wrong_alpha, "Levi-Civita regularization requires alpha = 1");
    if (!(s_span > 0.0)) raise(errc::domain, "fictitious-time span must be positive");

    const std::size_t ci = start.centre_index;
    const Vec2 c = cfg.centres()[ci].position;
    RegularizedRun run;
    run.end = start;

    std::size_t evals = 0;
    auto rhs = [&](double, const detail::StateVec<5>& y) {
        ++evals;
        const std::complex<double> w{y[0], y[1]};
        const std::complex<double> wp{y[2], y[3]};
        const double rho = std::norm(w);
        const Vec2 x = c + to_vec(w * w);
        const double u1 = detail::regular_part(cfg, x, ci);
        const Vec2 g1 = detail::regular_part_gradient(cfg, x, ci);
        const auto wpp = 0.5 * w * u1 + 0.5 * std::conj(w) * rho * to_complex(g1);
        return detail::StateVec<5>{wp.real(), wp.imag(), wpp.real(), wpp.imag(), rho};
    };

    detail::StateVec<5> y{start.w.x, start.w.y, start.w_prime.x, start.w_prime.y,
                          start.physical_time};
    double s = start.fictitious_time;
    const double s_end = s + s_span;
    const double invariant_in = start.energy_invariant(cfg);

    auto rho_of = [](const detail::StateVec<5>& v) { return v[0] * v[0] + v[1] * v[1]; };
    auto emit = [&](double /*s_now*/, const detail::StateVec<5>& v) {
        const double rho = rho_of(v);
        if (rho < options.min_emit_distance) return;
        const std::complex<double> w{v[0], v[1]};
        const std::complex<double> wp{v[2], v[3]};
        const Vec2 x = c + to_vec(w * w);
        const Vec2 vel = to_vec(2.0 * w * wp / rho);
        if (!run.segment.empty() &&
            !(v[4] > run.segment.t_back() + 1e-14 * std::max(1.0, std::abs(v[4]))))
            return;  // collision pinch; physical time barely advanced
        run.segment.push({v[4], x, vel}, cfg);
    };
    emit(s, y);

    // |w| changes on the fictitious scale |w| / |w'|; capping the step there
    // keeps the emitted samples dense enough for interpolation even when the
    // local error estimate vanishes (pure Kepler has w'' = 0 exactly).
    const double w_scale = std::sqrt(
        std::max({rho_of(y), options.exit_radius, 1e-4}));
    auto step_cap = [&](const detail::StateVec<5>& v) {
        const double wp = std::hypot(v[2], v[3]);
        double cap = 0.25 * (std::hypot(v[0], v[1]) + 0.2 * w_scale) / (wp + 1e-300);
        if (options.max_step > 0.0) cap = std::min(cap, options.max_step);
        return cap;
    };
    double h = std::min(0.05 * std::sqrt(std::max(rho_of(y), 1e-6)), step_cap(y));
    h = std::min(h, s_span);
    const double lc_tol = std::max(1e-13, 0.01 * tol);

    for (std::size_t step = 0; step < options.max_steps; ++step) {
        if (s >= s_end) break;
        h = std::min({h, s_end - s, step_cap(y)});
        detail::StateVec<5> y1, err;
        detail::dp45_step(rhs, s, y, h, y1, err);
        const double en = detail::error_norm(err, y, y1, lc_tol);
        if (en > 1.0) {
            h *= detail::next_step_factor(en);
            if (h < 1e-15 * std::max(1.0, std::abs(s)))
                raise(errc::step_underflow, "regularized step size collapsed");
            continue;
        }

        // overlapping regularization regions are not modelled
        const Vec2 x1 = c + to_vec(to_complex(Vec2{y1[0], y1[1]}) * to_complex(Vec2{y1[0], y1[1]}));
        for (std::size_t i = 0; i < cfg.centre_count(); ++i) {
            if (i == ci) continue;
            if ((x1 - cfg.centres()[i].position).norm() <
                0.01 * (std::isfinite(cfg.min_centre_gap()) ? cfg.min_centre_gap() : 1.0))
                raise(errc::overlap_region, "second centre entered its switch region");
        }

        bool stop = false;
        double s_next = s + h;
        // exit event: |w|^2 crossing exit_radius from below
        if (options.exit_radius > 0.0 && rho_of(y) < options.exit_radius &&
            rho_of(y1) >= options.exit_radius) {
            double lo = 0.0, hi = 1.0;
            detail::StateVec<5> yhi = y1;
            for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                detail::StateVec<5> ytmp, etmp;
                detail::dp45_step(rhs, s, y, h * mid, ytmp, etmp);
                if (rho_of(ytmp) >= options.exit_radius) {
                    hi = mid;
                    yhi = ytmp;
                } else {
                    lo = mid;
                }
            }
            y1 = yhi;
            s_next = s + h * hi;
            run.hit_exit_radius = true;
            stop = true;
        }
        // physical-time cap
        if (!stop && options.use_time_cap && y[4] < options.time_cap && y1[4] >= options.time_cap) {
            double lo = 0.0, hi = 1.0;
            detail::StateVec<5> yhi = y1;
            for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                detail::StateVec<5> ytmp, etmp;
                detail::dp45_step(rhs, s, y, h * mid, ytmp, etmp);
                if (ytmp[4] >= options.time_cap) {
                    hi = mid;
                    yhi = ytmp;
                } else {
                    lo = mid;
                }
            }
            y1 = yhi;
            s_next = s + h * hi;
            run.hit_time_cap = true;
            stop = true;
        }

        y = y1;
        s = s_next;
        emit(s, y);
        if (stop) break;
        h *= detail::next_step_factor(en);
    }

    run.end.w = {y[0], y[1]};
    run.end.w_prime = {y[2], y[3]};
    run.end.fictitious_time = s;
    run.end.physical_time = y[4];
    run.rhs_evaluations = evals;

    // the pass's own drift of the conserved quantity, in physical units at
    // the hand-back point, must respect the tolerance budget
    const double rho = run.end.w.squared_norm();
    if (rho >= options.min_emit_distance) {
        const double drift = 2.0 * (run.end.energy_invariant(cfg) - invariant_in) / rho;
        if (std::abs(drift) > 10.0 * tol * std::max(1.0, cfg.centres()[ci].mass))
            raise(errc::energy_residual,
                  "regularized pass lost energy accuracy: drift " + std::to_string(drift));
    }
    return run;
}

}  // namespace parashoot

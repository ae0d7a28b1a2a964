#pragma once

// Adaptive integration of the zero-energy equation of motion x'' = grad U(x).
// Dormand-Prince 5(4) with per-step error control; close encounters hand
// over to the Levi-Civita integrator for alpha = 1 and are an error for
// alpha > 1, where no regularization is available.

#include <cmath>
#include <string>
#include <vector>

#include "parashoot/error.hpp"
#include "parashoot/levi_civita.hpp"
#include "parashoot/potential.hpp"
#include "parashoot/rk45.hpp"
#include "parashoot/trajectory.hpp"

namespace parashoot {

struct IntegrateOptions {
    double tolerance = 1e-10;
    double switch_radius = 0.0;  // 0 -> 1e-2 * min centre gap
    enum class Encounter { automatic, ignore } on_encounter = Encounter::automatic;
    std::size_t max_steps = 2'000'000;
    std::size_t max_rhs_evaluations = 0;  // 0 = unlimited; for work-budget studies
    double energy_budget_factor = 100.0;

    double effective_switch_radius(const ProblemConfig& cfg) const {
        if (switch_radius > 0.0) return switch_radius;
        const double gap = cfg.min_centre_gap();
        return std::isfinite(gap) ? 0.01 * gap : 0.01;
    }
};

struct IntegrationRun {
    Trajectory trajectory;
    std::size_t rhs_evaluations = 0;
    std::size_t regularized_passes = 0;
    bool budget_exhausted = false;
};

namespace detail {

struct CartesianLeg {
    Trajectory traj;
    State end;
    bool entered_switch_region = false;
    bool budget_exhausted = false;
    std::size_t rhs_evaluations = 0;
};

inline CartesianLeg cartesian_leg(const State& start, double t_end, const ProblemConfig& cfg,
                                  const IntegrateOptions& opt, double switch_radius,
                                  std::size_t eval_budget) {
    CartesianLeg leg;
    std::size_t evals = 0;
    auto rhs = [&](double, const StateVec<4>& y) {
        ++evals;
        const Vec2 g = eval_gradient(cfg, {y[0], y[1]});
        return StateVec<4>{y[2], y[3], g.x, g.y};
    };

    StateVec<4> y{start.position.x, start.position.y, start.velocity.x, start.velocity.y};
    double t = start.time;
    const double dir = t_end >= t ? 1.0 : -1.0;
    leg.traj.push(start, cfg);

    auto mind = [&](const StateVec<4>& v) {
        return min_centre_distance(cfg, {v[0], v[1]}).first;
    };

    const bool watch_region = opt.on_encounter == IntegrateOptions::Encounter::automatic;
    double h = dir * std::min({0.05 * mind(y) / (std::hypot(y[2], y[3]) + 1e-12),
                               std::abs(t_end - t), 1.0});
    if (h == 0.0) h = dir * 1e-6;

    for (std::size_t step = 0; step < opt.max_steps; ++step) {
        if (dir * (t_end - t) <= 0.0) break;
        if (eval_budget > 0 && evals >= eval_budget) {
            leg.budget_exhausted = true;
            break;
        }
        if (std::abs(h) > std::abs(t_end - t)) h = t_end - t;
        // never cross more than half the clearance to the nearest centre
        const double speed = std::hypot(y[2], y[3]);
        const double guard = 0.5 * mind(y) / (speed + 1e-300);
        if (std::abs(h) > guard) h = dir * guard;

        StateVec<4> y1, err;
        dp45_step(rhs, t, y, h, y1, err);
        const double en = error_norm(err, y, y1, opt.tolerance);
        if (en > 1.0) {
            h *= next_step_factor(en);
            if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
                raise(errc::step_underflow, "cartesian step size collapsed near t = " +
                                                std::to_string(t));
            continue;
        }

        double t1 = t + h;
        bool entered = false;
        if (watch_region && mind(y) >= switch_radius && mind(y1) < switch_radius) {
            // bisect the partial step to land on the switch boundary
            double lo = 0.0, hi = 1.0;
            StateVec<4> yhi = y1;
            for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
                const double mid = 0.5 * (lo + hi);
                StateVec<4> ytmp, etmp;
                dp45_step(rhs, t, y, h * mid, ytmp, etmp);
                if (mind(ytmp) < switch_radius) {
                    hi = mid;
                    yhi = ytmp;
                } else {
                    lo = mid;
                }
            }
            y1 = yhi;
            t1 = t + h * hi;
            entered = true;
        }

        y = y1;
        t = t1;
        if (t > leg.traj.t_back())
            leg.traj.push({t, {y[0], y[1]}, {y[2], y[3]}}, cfg);
        if (entered) {
            leg.entered_switch_region = true;
            break;
        }
        h *= next_step_factor(en);
    }

    leg.end = {t, {y[0], y[1]}, {y[2], y[3]}};
    leg.rhs_evaluations = evals;
    return leg;
}

}  // namespace detail

// Full diagnostics variant; integrate_cartesian below is the plain facade.
inline IntegrationRun integrate_cartesian_run(const State& start, double t_end,
                                              const ProblemConfig& cfg,
                                              const IntegrateOptions& opt = {}) {
    if (!(t_end > start.time))
        raise(errc::domain, "integration span must be forward in time");
    const double u0 = eval_potential(cfg, start.position);
    const double h0 = start.energy(cfg);
    if (std::abs(h0) > 10.0 * opt.tolerance * std::max(1.0, u0))
        raise(errc::domain, "start state is not parabolic: H = " + std::to_string(h0));

    const double r_switch = opt.effective_switch_radius(cfg);
    if (min_centre_distance(cfg, start.position).first <
            r_switch * (1.0 - 1e-9) &&
        opt.on_encounter == IntegrateOptions::Encounter::automatic && cfg.alpha() > 1.0)
        raise(errc::close_encounter, "start state inside the switch region with alpha > 1");

    IntegrationRun run;
    State current = start;
    bool first_leg = true;
    while (current.time < t_end) {
        const std::size_t budget_left =
            opt.max_rhs_evaluations > 0
                ? (opt.max_rhs_evaluations > run.rhs_evaluations
                       ? opt.max_rhs_evaluations - run.rhs_evaluations
                       : 1)
                : 0;
        auto leg = detail::cartesian_leg(current, t_end, cfg, opt, r_switch, budget_left);
        run.rhs_evaluations += leg.rhs_evaluations;
        // merge, dropping the duplicated first sample
        for (std::size_t i = first_leg ? 0 : 1; i < leg.traj.size(); ++i)
            if (run.trajectory.empty() || leg.traj.samples[i].time > run.trajectory.t_back())
                run.trajectory.push(leg.traj.samples[i], cfg);
        first_leg = false;
        current = leg.end;
        if (leg.budget_exhausted) {
            run.budget_exhausted = true;
            break;
        }
        if (!leg.entered_switch_region) break;

        if (cfg.alpha() > 1.0)
            raise(errc::close_encounter,
                  "trajectory reached the switch radius and alpha > 1 cannot be regularized");

        // regularized pass through the encounter
        const auto [d, ci] = min_centre_distance(cfg, current.position);
        (void)d;
        auto lc = levi_civita_lift(current, ci, cfg);
        RegularizedOptions ro;
        ro.exit_radius = r_switch;
        ro.time_cap = t_end;
        ro.use_time_cap = true;
        auto reg = integrate_regularized(lc, 1e12, opt.tolerance, cfg, ro);
        run.rhs_evaluations += reg.rhs_evaluations;
        ++run.regularized_passes;
        for (const auto& s : reg.segment.samples)
            if (s.time > run.trajectory.t_back()) run.trajectory.push(s, cfg);
        current = levi_civita_drop(reg.end, cfg);
        if (reg.hit_time_cap) break;
        if (!reg.hit_exit_radius)
            raise(errc::step_underflow, "regularized pass ended without exiting the region");
    }

    run.trajectory.ring_crossings = detect_ring_crossings(run.trajectory, cfg.ring_radius());

    const double budget = opt.energy_budget_factor * opt.tolerance * std::max(1.0, u0);
    const double worst = run.trajectory.max_normalized_energy_residual();
    if (worst > budget && !run.budget_exhausted)
        raise(errc::energy_residual, "normalized energy residual " + std::to_string(worst) +
                                         " exceeded the integration budget " +
                                         std::to_string(budget));
    return run;
}

inline Trajectory integrate_cartesian(const State& start, double t_end, double tol,
                                      const ProblemConfig& cfg) {
    IntegrateOptions opt;
    opt.tolerance = tol;
    return integrate_cartesian_run(start, t_end, cfg, opt).trajectory;
}

}  // namespace parashoot

#pragma once

// Approximation of entire parabolic scattering solutions: solve the Bolza
// problem at q = R xi for a growing radius schedule with warm starts,
// time-centre each solution between its ring crossings, measure convergence
// on a fixed window, and fit every asymptotic law the construction predicts.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "parashoot/bolza.hpp"
#include "parashoot/error.hpp"
#include "parashoot/homotopy.hpp"
#include "parashoot/integrate.hpp"
#include "parashoot/minimize.hpp"
#include "parashoot/potential.hpp"
#include "parashoot/trajectory.hpp"
#include "parashoot/variational.hpp"

namespace parashoot {

struct ScatteringProblem {
    Vec2 dir_minus;  // asymptotic direction for t -> -inf
    Vec2 dir_plus;   // asymptotic direction for t -> +inf
    Partition partition;
    ProblemConfig cfg;

    ScatteringProblem(Vec2 dm, Vec2 dp, Partition p, ProblemConfig c)
        : dir_minus(dm.normalized()), dir_plus(dp.normalized()), partition(std::move(p)),
          cfg(std::move(c)) {
        if ((dir_minus - dir_plus).norm() < 1e-12)
            raise(errc::config, "asymptotic directions must differ");
        partition.validate(cfg.centre_count());
    }

    ParityClass target_class() const {
        return partition_to_class(partition, cfg.centre_count());
    }
};

struct EntireSettings {
    MinimizeSettings solver;
    std::size_t base_nodes = 256;
    double energy_budget_fraction = 1e-3;
    std::size_t max_emission_refinements = 6;
    std::size_t node_cap = 1 << 17;
    std::size_t probe_points = 257;
    double integrator_tolerance = 1e-10;
};

struct BolzaRun {
    BolzaSolution solution;   // trajectory time-centred between ring crossings
    std::size_t iterations = 0;
    std::size_t nodes = 0;
    double time_shift = 0.0;  // applied so that t- = -t+
    double ring_enter = 0.0;  // t- after centring
    double ring_exit = 0.0;   // t+ after centring
};

struct ContinuationResult {
    std::vector<double> radii;
    std::vector<BolzaRun> runs;
    double window = 0.0;                  // T_w: half the smallest inside-ring span
    std::vector<double> sup_deviations;   // consecutive-pair sup gaps on the window
    std::vector<double> inside_actions;   // action between the ring crossings
    bool converged = false;
};

struct AsymptoticFit {
    double exponent = 0.0;
    double coefficient = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    double residual = 0.0;  // rms in log space
};

namespace detail {

struct LogLogFit {
    double slope, intercept, rms;
};

inline LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::log(y[i]) - (slope * std::log(x[i]) + intercept);
        rss += e * e;
    }
    return {slope, intercept, std::sqrt(rss / n)};
}

// Action of a trajectory between two times, by Simpson on the dense output.
inline double action_between(const Trajectory& traj, double a, double b,
                             const ProblemConfig& cfg, std::size_t points = 513) {
    if (!(b > a)) raise(errc::domain, "empty action window");
    std::vector<double> f(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
        const State s = traj.state_at(t);
        f[i] = 0.5 * s.velocity.squared_norm() + eval_potential(cfg, s.position);
    }
    return simpson(f, (b - a) / static_cast<double>(points - 1));
}

}  // namespace detail

// One Bolza solve at endpoint radius R, warm-started when a previous
// minimizer is available. The minimizer grid is doubled until the rescaled
// trajectory meets the zero-energy emission budget, then the trajectory is
// shifted so the two ring crossings are symmetric about t = 0.
inline BolzaRun solve_bolza_at(double radius, const ScatteringProblem& prob,
                               const std::optional<DiscretePath>& warm,
                               const EntireSettings& settings = {},
                               std::size_t nodes_override = 0) {
    const auto& cfg = prob.cfg;
    if (!(radius > cfg.ring_radius()))
        raise(errc::domain, "endpoint radius must exceed the diagnostic ring");

    const Vec2 q_minus = prob.dir_minus * radius;
    const Vec2 q_plus = prob.dir_plus * radius;
    const ParityClass target = prob.target_class();
    const std::size_t nodes = nodes_override > 0 ? nodes_override : settings.base_nodes;

    DiscretePath seed = warm ? extend_path_radially(*warm, cfg, radius, nodes)
                             : seed_path(q_minus, q_plus, target, cfg, nodes, settings.solver);

    auto res = minimize_in_class(seed, target, cfg, settings.solver);
    std::size_t iterations = res.iterations;

    // refine until the rescaled trajectory passes the pointwise energy check
    std::size_t level = 0;
    std::optional<BolzaSolution> sol;
    while (!sol) {
        try {
            sol = to_trajectory(res.path, cfg, settings.solver.arc_nodes,
                                settings.energy_budget_fraction);
        } catch (const solver_error& e) {
            if (e.code() != errc::energy_residual ||
                level >= settings.max_emission_refinements ||
                2 * res.path.segments() > settings.node_cap)
                throw;
            ++level;
            res = minimize_in_class(res.path.refined(), target, cfg, settings.solver);
            iterations += res.iterations;
        }
    }

    if (sol->trajectory.ring_crossings.size() < 2)
        raise(errc::domain, "Bolza trajectory must cross the ring twice");
    const double t_minus = sol->trajectory.ring_crossings.front();
    const double t_plus = sol->trajectory.ring_crossings.back();
    const double shift = -0.5 * (t_minus + t_plus);
    sol->trajectory.shift_time(shift);
    const std::size_t final_nodes = sol->path.segments();
    return BolzaRun{std::move(*sol), iterations, final_nodes, shift, t_minus + shift,
                    t_plus + shift};
}

// Warm-started chain of solves over an increasing radius schedule.
inline ContinuationResult continue_in_radius(const ScatteringProblem& prob,
                                             const std::vector<double>& schedule,
                                             const EntireSettings& settings = {}) {
    if (schedule.size() < 2) raise(errc::insufficient_data, "schedule needs at least two radii");
    if (!(schedule.front() > 2.0 * prob.cfg.ring_radius()))
        raise(errc::domain, "first radius must exceed twice the ring radius");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] > schedule[i - 1]))
            raise(errc::domain, "schedule must be strictly increasing");

    const double growth = 0.5 * (2.0 + prob.cfg.alpha());
    ContinuationResult result;
    std::optional<DiscretePath> warm;
    for (double radius : schedule) {
        const double scale = std::pow(radius / schedule.front(), growth);
        std::size_t nodes = static_cast<std::size_t>(
            std::ceil(static_cast<double>(settings.base_nodes) * scale / 2.0) * 2.0);
        nodes = std::min(nodes, settings.node_cap);
        auto run = solve_bolza_at(radius, prob, warm, settings, nodes);
        warm = run.solution.path;
        result.radii.push_back(radius);
        result.runs.push_back(std::move(run));
    }

    double t_w = std::numeric_limits<double>::infinity();
    for (const auto& run : result.runs) t_w = std::min(t_w, run.ring_exit);
    result.window = t_w;

    for (std::size_t i = 0; i + 1 < result.runs.size(); ++i) {
        double sup = 0.0;
        for (std::size_t k = 0; k < settings.probe_points; ++k) {
            const double t = -t_w + 2.0 * t_w * static_cast<double>(k) /
                                        static_cast<double>(settings.probe_points - 1);
            sup = std::max(sup, (result.runs[i].solution.trajectory.position_at(t) -
                                 result.runs[i + 1].solution.trajectory.position_at(t))
                                    .norm());
        }
        result.sup_deviations.push_back(sup);
    }

    for (const auto& run : result.runs)
        result.inside_actions.push_back(detail::action_between(
            run.solution.trajectory, run.ring_enter, run.ring_exit, prob.cfg));

    result.converged = true;
    const std::size_t nd = result.sup_deviations.size();
    for (std::size_t i = nd >= 3 ? nd - 3 : 0; i + 1 < nd; ++i)
        if (result.sup_deviations[i + 1] > result.sup_deviations[i]) result.converged = false;
    return result;
}

// Extend both trajectory tails by direct integration until |x| reaches
// target_radius; the asymptotic fits want more than the Bolza span.
inline Trajectory extend_tails(const Trajectory& traj, const ProblemConfig& cfg,
                               double target_radius, double tol = 1e-10) {
    // The Bolza endpoint velocities carry the grid's finite-difference error;
    // project them back onto the zero-energy shell before integrating on.
    auto project = [&](State s) {
        const double u = eval_potential(cfg, s.position);
        s.velocity = s.velocity * std::sqrt(2.0 * u / s.velocity.squared_norm());
        return s;
    };
    auto grow = [&](State s0) {
        Trajectory acc;
        acc.push(project(s0), cfg);
        double horizon = std::max(1.0, std::abs(s0.time));
        while (acc.samples.back().position.norm() < target_radius) {
            IntegrateOptions opt;
            opt.tolerance = tol;
            auto run = integrate_cartesian_run(acc.samples.back(), acc.samples.back().time + horizon,
                                               cfg, opt);
            for (std::size_t i = 1; i < run.trajectory.size(); ++i)
                acc.push(run.trajectory.samples[i], cfg);
            horizon *= 2.0;
            if (horizon > 1e12) raise(errc::tail_too_short, "tail extension failed to reach radius");
        }
        return acc;
    };

    // forward tail
    Trajectory fwd = grow(traj.samples.back());
    // backward tail via time reversal
    const State& first = traj.samples.front();
    Trajectory bwd = grow({-first.time, first.position, -first.velocity});

    Trajectory out;
    for (std::size_t i = bwd.size(); i-- > 1;) {
        const auto& s = bwd.samples[i];
        out.push({-s.time, s.position, -s.velocity}, cfg);
    }
    for (const auto& s : traj.samples) out.push(s, cfg);
    for (std::size_t i = 1; i < fwd.size(); ++i) out.push(fwd.samples[i], cfg);
    out.ring_crossings = detect_ring_crossings(out, cfg.ring_radius());
    return out;
}

struct AsymptoticDirections {
    Vec2 dir_minus;
    Vec2 dir_plus;
    double decay_exponent_plus = 0.0;   // fitted power of |s'(t)| ~ (t - T)^-p
    double decay_exponent_minus = 0.0;
    double decay_residual = 0.0;
};

// Unit-position directions at the trajectory extremes plus the fitted decay
// of the angular speed |s'(t)| = |x ^ x'| / r^2 on the tails.
inline AsymptoticDirections asymptotic_directions(const Trajectory& traj,
                                                  const ProblemConfig&) {
    if (traj.ring_crossings.size() < 2)
        raise(errc::tail_too_short, "trajectory does not leave the ring on both sides");
    const double t_plus = traj.ring_crossings.back();
    const double t_minus = traj.ring_crossings.front();
    if (!(traj.t_back() > t_plus) || !(traj.t_front() < t_minus))
        raise(errc::tail_too_short, "tails do not extend beyond the ring");

    AsymptoticDirections out;
    out.dir_minus = traj.samples.front().position.normalized();
    out.dir_plus = traj.samples.back().position.normalized();

    auto fit_side = [&](bool forward) {
        std::vector<double> ts, ss;
        for (const auto& s : traj.samples) {
            const double tau = forward ? s.time - t_plus : t_minus - s.time;
            if (tau <= 0.0) continue;
            const double r2 = s.position.squared_norm();
            const double sdot = std::abs(cross(s.position, s.velocity)) / r2;
            if (sdot <= 0.0) continue;
            ts.push_back(tau);
            ss.push_back(sdot);
        }
        if (ts.size() < 8) return std::nan("");
        const double hi = *std::max_element(ts.begin(), ts.end());
        std::vector<double> fx, fy;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (ts[i] >= 0.05 * hi) {
                fx.push_back(ts[i]);
                fy.push_back(ss[i]);
            }
        }
        if (fx.size() < 8) return std::nan("");
        const auto fit = detail::loglog_fit(fx, fy);
        out.decay_residual = std::max(out.decay_residual, fit.rms);
        return -fit.slope;
    };
    out.decay_exponent_plus = fit_side(true);
    out.decay_exponent_minus = fit_side(false);
    return out;
}

// Log-log fit of r against |t| over the final decade of the forward tail.
inline AsymptoticFit fit_radius_law(const Trajectory& traj, const ProblemConfig&) {
    if (traj.ring_crossings.empty())
        raise(errc::tail_too_short, "trajectory never crosses the ring");
    const double t_plus = traj.ring_crossings.back();
    const double t_hi = traj.t_back();
    const double t_lo = t_hi / 10.0;
    if (!(t_lo > t_plus) || !(t_lo > 0.0))
        raise(errc::insufficient_span, "tail must span a decade beyond the ring");

    std::vector<double> ts, rs;
    for (const auto& s : traj.samples) {
        if (s.time >= t_lo) {
            ts.push_back(s.time);
            rs.push_back(s.position.norm());
        }
    }
    if (ts.size() < 8) raise(errc::insufficient_span, "too few tail samples for the fit");
    const auto fit = detail::loglog_fit(ts, rs);
    return {fit.slope, std::exp(fit.intercept), t_lo, t_hi, fit.rms};
}

struct ActionScaling {
    double coefficient = 0.0;  // c in A ~ c R^(1 - alpha/2) + d
    double offset = 0.0;       // d
    double exponent = 0.0;     // fixed at 1 - alpha/2
    double rms = 0.0;
};

inline ActionScaling action_scaling(const ContinuationResult& result,
                                    const ProblemConfig& cfg) {
    if (result.radii.size() < 4)
        raise(errc::insufficient_data, "action fit needs at least four radii");
    const double p = 1.0 - 0.5 * cfg.alpha();
    const std::size_t n = result.radii.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::pow(result.radii[i], p);
        const double y = result.runs[i].solution.action;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    ActionScaling out;
    out.exponent = p;
    out.coefficient = (n * sxy - sx * sy) / denom;
    out.offset = (sy - out.coefficient * sx) / n;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = result.runs[i].solution.action -
                         (out.coefficient * std::pow(result.radii[i], p) + out.offset);
        rss += e * e;
    }
    out.rms = std::sqrt(rss / n);
    return out;
}

struct CollapseRow {
    double eps;
    double deviation;  // sup_t | eps x(t eps^-(2+alpha)/2) - y0(t) |
};

// Compare the rescaled solution against the piecewise rectilinear limit on a
// fixed probe grid. The rescaling merges the centres into one as eps -> 0.
inline std::vector<CollapseRow> collapse_experiment(const Trajectory& entire,
                                                    const ProblemConfig& cfg,
                                                    const Vec2& dir_minus, const Vec2& dir_plus,
                                                    const std::vector<double>& eps_list,
                                                    double probe_span = 2.5,
                                                    std::size_t probe_points = 101) {
    const double a = cfg.alpha();
    const double growth = 0.5 * (2.0 + a);
    const double expo = 2.0 / (2.0 + a);
    const double coef = std::pow(std::sqrt(cfg.far_mass() / (2.0 * a)) * (2.0 + a), expo);

    std::vector<CollapseRow> rows;
    for (double eps : eps_list) {
        const double stretch = std::pow(eps, -growth);
        if (probe_span * stretch > std::max(std::abs(entire.t_back()), std::abs(entire.t_front())))
            raise(errc::window_too_short,
                  "entire-solution window too short for eps = " + std::to_string(eps));
        double sup = 0.0;
        for (std::size_t k = 0; k < probe_points; ++k) {
            const double t = -probe_span + 2.0 * probe_span * static_cast<double>(k) /
                                               static_cast<double>(probe_points - 1);
            const Vec2 y_eps = entire.position_at(t * stretch) * eps;
            Vec2 y0{0.0, 0.0};
            if (t < 0.0) y0 = dir_minus * (coef * std::pow(-t, expo));
            if (t > 0.0) y0 = dir_plus * (coef * std::pow(t, expo));
            sup = std::max(sup, (y_eps - y0).norm());
        }
        rows.push_back({eps, sup});
    }
    return rows;
}

// Integrate a single-centre zero-energy orbit from its pericentre until the
// radius has grown by `radius_growth`, then close the remaining swept angle
// with the exact radial quadrature of the same potential. Twice the half
// angle is the full spanned angle, to be compared with 2 pi / (2 - alpha).
inline double kepler_parabolic_angle(double alpha, double mass, double radius_growth = 1e4,
                                     double tol = 1e-10) {
    ProblemConfig cfg(alpha, {Centre{{0.0, 0.0}, mass}});
    const double q = 1.0;
    const double v0 = std::sqrt(2.0 * mass / (alpha * std::pow(q, alpha)));
    State start{0.0, {q, 0.0}, {0.0, v0}};

    // outgoing radial time to the target radius, from the separable escape law
    const double r_far = q * radius_growth;
    const double c = (1.0 + 0.5 * alpha) * std::sqrt(2.0 * mass / alpha);
    const double t_est = (std::pow(r_far, 1.0 + 0.5 * alpha) - 1.0) / c;

    IntegrateOptions opt;
    opt.tolerance = tol;
    auto run = integrate_cartesian_run(start, 1.3 * t_est, cfg, opt);

    double swept = 0.0;
    double r_exit = 0.0;
    double h_exit = 0.0;
    bool reached = false;
    for (std::size_t i = 0; i + 1 < run.trajectory.size(); ++i) {
        const auto& s0 = run.trajectory.samples[i];
        const auto& s1 = run.trajectory.samples[i + 1];
        swept += std::atan2(cross(s0.position, s1.position), dot(s0.position, s1.position));
        if (s1.position.norm() >= r_far) {
            r_exit = s1.position.norm();
            h_exit = cross(s1.position, s1.velocity);
            reached = true;
            break;
        }
    }
    if (!reached) raise(errc::tail_too_short, "orbit did not reach the target radius");

    const double a_inf = std::sqrt(2.0 * mass / alpha);
    const double tail = (2.0 / (2.0 - alpha)) *
                        std::asin(std::abs(h_exit) /
                                  (a_inf * std::pow(r_exit, 1.0 - 0.5 * alpha)));
    return 2.0 * (std::abs(swept) + tail);
}

inline std::vector<CrossingPair> self_intersection_check(const Trajectory& traj) {
    std::vector<Vec2> pts;
    pts.reserve(traj.size());
    for (const auto& s : traj.samples) pts.push_back(s.position);
    return polyline_self_intersections(pts);
}

}  // namespace parashoot

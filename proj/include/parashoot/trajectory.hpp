#pragma once

// Time-stamped trajectory samples with per-sample diagnostics, cubic Hermite
// dense output between samples, and the radial diagnostics built on top of
// it (ring crossings, virial residual, Sundman time).

#include <algorithm>
#include <cmath>
#include <vector>

#include "parashoot/error.hpp"
#include "parashoot/geometry.hpp"
#include "parashoot/potential.hpp"

namespace parashoot {

struct State {
    double time = 0.0;
    Vec2 position;
    Vec2 velocity;

    double energy(const ProblemConfig& cfg) const {
        return 0.5 * velocity.squared_norm() - eval_potential(cfg, position);
    }
};

struct Trajectory {
    std::vector<State> samples;
    std::vector<double> energy_residuals;                    // H at each sample
    std::vector<std::pair<double, std::size_t>> min_distance_log;  // (dist, centre)
    std::vector<double> ring_crossings;                      // times with |x| = K

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double t_front() const { return samples.front().time; }
    double t_back() const { return samples.back().time; }

    void push(const State& s, const ProblemConfig& cfg) {
        if (!samples.empty() && !(s.time > samples.back().time))
            raise(errc::domain, "trajectory times must be strictly increasing");
        samples.push_back(s);
        energy_residuals.push_back(s.energy(cfg));
        min_distance_log.push_back(min_centre_distance(cfg, s.position));
    }

    void shift_time(double delta) {
        for (auto& s : samples) s.time += delta;
        for (auto& t : ring_crossings) t += delta;
    }

    double max_abs_energy_residual() const {
        double m = 0.0;
        for (double r : energy_residuals) m = std::max(m, std::abs(r));
        return m;
    }

    // Residual relative to the local energy scale max(1, U). Near a
    // collision U blows up and |H| carries rounding of size U * eps, so the
    // raw residual alone over-reports the error there.
    double max_normalized_energy_residual() const {
        double m = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double u = 0.5 * samples[i].velocity.squared_norm() - energy_residuals[i];
            m = std::max(m, std::abs(energy_residuals[i]) / std::max(1.0, u));
        }
        return m;
    }

    // Cubic Hermite interpolation of position between the bracketing samples.
    Vec2 position_at(double t) const {
        const auto [i, s] = locate(t);
        const State& a = samples[i];
        const State& b = samples[i + 1];
        const double h = b.time - a.time;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1;
        const double h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2;
        const double h11 = s3 - s2;
        return a.position * h00 + a.velocity * (h10 * h) + b.position * h01 +
               b.velocity * (h11 * h);
    }

    Vec2 velocity_at(double t) const {
        const auto [i, s] = locate(t);
        const State& a = samples[i];
        const State& b = samples[i + 1];
        const double h = b.time - a.time;
        const double s2 = s * s;
        const double d00 = (6 * s2 - 6 * s) / h;
        const double d10 = 3 * s2 - 4 * s + 1;
        const double d01 = (-6 * s2 + 6 * s) / h;
        const double d11 = 3 * s2 - 2 * s;
        return a.position * d00 + a.velocity * d10 + b.position * d01 + b.velocity * d11;
    }

    State state_at(double t) const { return {t, position_at(t), velocity_at(t)}; }

  private:
    std::pair<std::size_t, double> locate(double t) const {
        if (samples.size() < 2) raise(errc::domain, "trajectory too short to interpolate");
        if (t < t_front() - 1e-12 || t > t_back() + 1e-12)
            raise(errc::domain, "interpolation time outside trajectory span");
        const auto it = std::upper_bound(
            samples.begin(), samples.end(), t,
            [](double v, const State& s) { return v < s.time; });
        std::size_t i = it == samples.begin() ? 0 : static_cast<std::size_t>(it - samples.begin()) - 1;
        i = std::min(i, samples.size() - 2);
        const double h = samples[i + 1].time - samples[i].time;
        return {i, std::clamp((t - samples[i].time) / h, 0.0, 1.0)};
    }
};

// Uniform-grid copy via dense output; used by the grid-refinement diagnostics.
inline Trajectory resample_uniform(const Trajectory& traj, std::size_t count,
                                   const ProblemConfig& cfg) {
    if (count < 2 || traj.size() < 2) raise(errc::domain, "resample needs at least two samples");
    Trajectory out;
    for (std::size_t k = 0; k < count; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(count - 1);
        const double t = traj.t_front() + (traj.t_back() - traj.t_front()) * f;
        out.push(traj.state_at(t), cfg);
    }
    out.ring_crossings = traj.ring_crossings;
    return out;
}

// All instants with |x(t)| = K, located by bisection on the dense output.
inline std::vector<double> detect_ring_crossings(const Trajectory& traj, double ring_radius) {
    std::vector<double> out;
    if (traj.size() < 2) return out;
    auto g = [&](double t) { return traj.position_at(t).norm() - ring_radius; };
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        double ta = traj.samples[i].time;
        double tb = traj.samples[i + 1].time;
        double ga = traj.samples[i].position.norm() - ring_radius;
        double gb = traj.samples[i + 1].position.norm() - ring_radius;
        if (ga == 0.0) {
            if (out.empty() || std::abs(out.back() - ta) > 1e-9) out.push_back(ta);
            continue;
        }
        if (ga * gb > 0.0) continue;
        while (tb - ta > 1e-10) {
            const double tm = 0.5 * (ta + tb);
            const double gm = g(tm);
            if (ga * gm <= 0.0) {
                tb = tm;
            } else {
                ta = tm;
                ga = gm;
            }
        }
        out.push_back(0.5 * (ta + tb));
    }
    if (!traj.samples.empty() &&
        std::abs(traj.samples.back().position.norm() - ring_radius) == 0.0)
        out.push_back(traj.samples.back().time);
    return out;
}

struct VirialReport {
    // residual of d^2/dt^2 (r^2/2) = 2U + grad U . x at the interior samples
    std::vector<double> residuals;
    std::vector<double> times;
    // samples with |x| >= K where 2U + grad U . x dipped below the
    // (2-alpha) m / (2 alpha r^alpha) convexity bound
    std::vector<std::size_t> convexity_violations;
    double convexity_tolerance = 1e-6;
};

inline VirialReport virial_residual(const Trajectory& traj, const ProblemConfig& cfg,
                                    double convexity_tolerance = 1e-6) {
    VirialReport rep;
    rep.convexity_tolerance = convexity_tolerance;
    const auto& s = traj.samples;
    const double a = cfg.alpha();
    const double m = cfg.far_mass();
    const double K = cfg.ring_radius();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double r = s[i].position.norm();
        const double rhs = 2.0 * eval_potential(cfg, s[i].position) +
                           dot(eval_gradient(cfg, s[i].position), s[i].position);
        if (r >= K) {
            const double bound = (2.0 - a) * m / (2.0 * a * std::pow(r, a));
            if (rhs < bound - convexity_tolerance) rep.convexity_violations.push_back(i);
        }
        if (i == 0 || i + 1 == s.size()) continue;
        // second difference of r^2/2 on a possibly nonuniform grid
        const double t0 = s[i - 1].time, t1 = s[i].time, t2 = s[i + 1].time;
        const double f0 = 0.5 * s[i - 1].position.squared_norm();
        const double f1 = 0.5 * s[i].position.squared_norm();
        const double f2 = 0.5 * s[i + 1].position.squared_norm();
        const double dd = 2.0 * (f0 / ((t1 - t0) * (t2 - t0)) - f1 / ((t2 - t1) * (t1 - t0)) +
                                 f2 / ((t2 - t1) * (t2 - t0)));
        rep.residuals.push_back(dd - rhs);
        rep.times.push_back(t1);
    }
    return rep;
}

// Cumulative Sundman integral s(t) = int dt / |x - c|, zeroed at t0.
// Simpson per interval with the Hermite midpoint; strictly increasing.
inline std::vector<double> sundman_time(const Trajectory& traj, std::size_t centre_index,
                                        double t0, const ProblemConfig& cfg) {
    if (centre_index >= cfg.centre_count()) raise(errc::domain, "centre index out of range");
    if (t0 < traj.t_front() - 1e-12 || t0 > traj.t_back() + 1e-12)
        raise(errc::domain, "t0 outside trajectory span");
    const Vec2 c = cfg.centres()[centre_index].position;
    auto inv_dist = [&](const Vec2& x) {
        const double d = (x - c).norm();
        if (d <= 0.0) raise(errc::singularity, "trajectory touches the centre");
        return 1.0 / d;
    };
    const std::size_t n = traj.size();
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double ta = traj.samples[i].time;
        const double tb = traj.samples[i + 1].time;
        const double fa = inv_dist(traj.samples[i].position);
        const double fm = inv_dist(traj.position_at(0.5 * (ta + tb)));
        const double fb = inv_dist(traj.samples[i + 1].position);
        s[i + 1] = s[i] + (tb - ta) * (fa + 4.0 * fm + fb) / 6.0;
    }
    // shift so that s(t0) = 0, interpolating within the containing interval
    double s0 = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (t0 <= traj.samples[i + 1].time || i + 2 == n) {
            const double ta = traj.samples[i].time;
            const double tb = traj.samples[i + 1].time;
            const double f = tb > ta ? std::clamp((t0 - ta) / (tb - ta), 0.0, 1.0) : 0.0;
            s0 = s[i] + (s[i + 1] - s[i]) * f;
            break;
        }
    }
    for (auto& v : s) v -= s0;
    return s;
}

}  // namespace parashoot

#pragma once

// Class-constrained minimization of the Maupertuis functional.
//
// Limited-memory BFGS over the interior nodes, preconditioned by the
// kinetic (tridiagonal) part of the Hessian, with backtracking Armijo
// line search. The winding-parity class of the iterate is re-checked after
// every accepted step; a step that flips it is halved and retried. A
// quadratic barrier inside barrier_radius keeps iterates off the centres;
// it must be inactive at the reported minimizer.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "parashoot/error.hpp"
#include "parashoot/variational.hpp"

namespace parashoot {

struct MinimizeSettings {
    double gradient_tolerance = 1e-8;
    std::size_t max_iterations = 50000;
    double barrier_strength = 1e4;
    double barrier_radius = 0.0;  // 0 -> min(0.1, min centre gap / 4)
    bool step_shrink_on_class_change = true;
    std::size_t arc_nodes = 128;
    std::size_t lbfgs_memory = 12;

    double effective_barrier_radius(const ProblemConfig& cfg) const {
        if (barrier_radius > 0.0) return barrier_radius;
        const double gap = cfg.min_centre_gap();
        return std::isfinite(gap) ? std::min(0.1, gap / 4.0) : 0.1;
    }

    void validate(const ProblemConfig& cfg) const {
        if (!(gradient_tolerance > 0.0) || max_iterations == 0 || !(barrier_strength > 0.0))
            raise(errc::config, "minimize settings must be positive");
        const double rb = effective_barrier_radius(cfg);
        const double gap = cfg.min_centre_gap();
        if (std::isfinite(gap) && !(rb < gap / 2.0))
            raise(errc::config, "barrier_radius must stay below half the centre gap");
    }
};

struct MinimizeResult {
    DiscretePath path;
    double maupertuis_value = 0.0;
    double gradient_norm = 0.0;
    std::size_t iterations = 0;
    std::size_t function_evaluations = 0;
};

namespace detail {

inline double barrier_value(const std::vector<Vec2>& nodes, const ProblemConfig& cfg,
                            double strength, double radius) {
    double acc = 0.0;
    for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
        for (const auto& c : cfg.centres()) {
            const double d = (nodes[k] - c.position).norm();
            if (d < radius) {
                const double z = radius - d;
                acc += strength * z * z;
            }
        }
    }
    return acc;
}

inline void barrier_gradient_add(const std::vector<Vec2>& nodes, const ProblemConfig& cfg,
                                 double strength, double radius, std::vector<Vec2>& grad) {
    for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
        for (const auto& c : cfg.centres()) {
            const Vec2 rel = nodes[k] - c.position;
            const double d = rel.norm();
            if (d < radius && d > 0.0)
                grad[k] -= rel * (2.0 * strength * (radius - d) / d);
        }
    }
}

// Solve tridiag(-1, 2, -1) z = q for the x and y strands of the interior
// nodes (Thomas algorithm). Used as the L-BFGS seed matrix: the kinetic
// part of the Hessian is exactly (2 pot / dt) times this matrix.
inline void kinetic_solve(std::vector<Vec2>& q) {
    const std::size_t n = q.size();
    if (n == 0) return;
    std::vector<double> upper(n);
    upper[0] = -0.5;
    q[0] = q[0] * 0.5;
    for (std::size_t i = 1; i < n; ++i) {
        const double pivot = 2.0 + upper[i - 1];
        upper[i] = -1.0 / pivot;
        q[i] = (q[i] + q[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) q[i] = q[i] - q[i + 1] * upper[i];
}

struct Objective {
    const ProblemConfig& cfg;
    double barrier_strength;
    double barrier_radius;
    std::size_t evals = 0;

    // Returns {F, M}; +inf when a node or quadrature point collides.
    std::pair<double, double> value(const DiscretePath& path) {
        ++evals;
        try {
            const double m = maupertuis(path, cfg);
            const double b = barrier_value(path.nodes(), cfg, barrier_strength, barrier_radius);
            return {m + b, m};
        } catch (const solver_error& e) {
            if (e.code() == errc::singularity)
                return {std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity()};
            throw;
        }
    }

    std::vector<Vec2> gradient(const DiscretePath& path) {
        auto g = maupertuis_gradient(path, cfg);
        barrier_gradient_add(path.nodes(), cfg, barrier_strength, barrier_radius, g);
        return g;
    }
};

inline double norm_of(const std::vector<Vec2>& g) {
    double acc = 0.0;
    for (const auto& v : g) acc += v.squared_norm();
    return std::sqrt(acc);
}

inline double dot_of(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += dot(a[i], b[i]);
    return acc;
}

}  // namespace detail

// Local minimization; when `target` is set the iterate is kept inside the
// parity class throughout. On success the gradient norm satisfies
// |grad| <= tol (1 + |M|), the barrier is inactive, and M did not increase.
inline MinimizeResult minimize(const DiscretePath& seed, const ProblemConfig& cfg,
                               const MinimizeSettings& settings,
                               const std::optional<ParityClass>& target = std::nullopt) {
    settings.validate(cfg);
    const double rb = settings.effective_barrier_radius(cfg);
    detail::Objective obj{cfg, settings.barrier_strength, rb};

    DiscretePath path = seed;
    const std::size_t n = path.nodes().size();

    auto parity_matches = [&](const DiscretePath& p) {
        try {
            return parity_class(p, cfg, settings.arc_nodes) == *target;
        } catch (const solver_error&) {
            return false;  // ill-conditioned winding counts as a flip
        }
    };
    if (target && !parity_matches(path))
        raise(errc::domain, "seed path is not in the requested parity class");

    auto [f, m] = obj.value(path);
    if (!std::isfinite(f)) raise(errc::singularity, "seed path touches a centre");
    const double f_seed = f;
    auto grad = obj.gradient(path);
    double gnorm = detail::norm_of(grad);
    double pot = potential_integral(path, cfg);

    std::deque<std::pair<std::vector<Vec2>, std::vector<Vec2>>> memory;  // (s, y)
    std::size_t iter = 0;

    auto precondition = [&](std::vector<Vec2> q) {
        // interior slice -> kinetic solve -> scale by dt / (2 pot)
        std::vector<Vec2> inner(q.begin() + 1, q.end() - 1);
        detail::kinetic_solve(inner);
        const double scale = path.dt() / (2.0 * std::max(pot, 1e-12));
        std::vector<Vec2> out(q.size(), Vec2{0, 0});
        for (std::size_t i = 0; i < inner.size(); ++i) out[i + 1] = inner[i] * scale;
        return out;
    };

    auto two_loop = [&](const std::vector<Vec2>& g) {
        std::vector<Vec2> q = g;
        std::vector<double> alpha(memory.size());
        for (std::size_t i = memory.size(); i-- > 0;) {
            const auto& [s, y] = memory[i];
            const double rho = 1.0 / detail::dot_of(y, s);
            alpha[i] = rho * detail::dot_of(s, q);
            for (std::size_t k = 0; k < q.size(); ++k) q[k] -= y[k] * alpha[i];
        }
        std::vector<Vec2> r = precondition(q);
        for (std::size_t i = 0; i < memory.size(); ++i) {
            const auto& [s, y] = memory[i];
            const double rho = 1.0 / detail::dot_of(y, s);
            const double beta = rho * detail::dot_of(y, r);
            for (std::size_t k = 0; k < r.size(); ++k) r[k] += s[k] * (alpha[i] - beta);
        }
        for (auto& v : r) v = -v;
        return r;
    };

    bool tried_steepest = false;
    double best_gnorm = gnorm;
    std::size_t last_improvement = 0;
    while (true) {
        if (gnorm <= settings.gradient_tolerance * (1.0 + std::abs(m))) break;
        if (iter >= settings.max_iterations)
            raise(errc::max_iterations, "minimizer hit the iteration budget at |grad| = " +
                                            std::to_string(gnorm));
        if (iter > last_improvement + 60) break;  // stagnant; hand over to the polish phase

        std::vector<Vec2> dir = two_loop(grad);
        double slope = detail::dot_of(dir, grad);
        if (!(slope < 0.0)) {
            memory.clear();
            dir = precondition(grad);
            for (auto& v : dir) v = -v;
            slope = detail::dot_of(dir, grad);
            if (!(slope < 0.0)) break;  // gradient numerically zero
        }

        // Backtracking Armijo; parity flips and singular evaluations both
        // shrink the step. Strict decrease required: once c1 step slope
        // underflows, a bit-identical value must not count as progress.
        constexpr double c1 = 1e-4;
        double step = 1.0;
        bool accepted = false;
        DiscretePath candidate = path;
        double f_new = 0.0, m_new = 0.0;
        while (step >= 1e-12) {
            auto& cn = candidate.mutable_nodes();
            for (std::size_t k = 1; k + 1 < n; ++k)
                cn[k] = path.nodes()[k] + dir[k] * step;
            auto [fc, mc] = obj.value(candidate);
            if (std::isfinite(fc) && fc < f && fc <= f + c1 * step * slope) {
                if (target && !parity_matches(candidate)) {
                    if (!settings.step_shrink_on_class_change)
                        raise(errc::class_change, "step left the parity class");
                    step *= 0.5;
                    continue;
                }
                accepted = true;
                f_new = fc;
                m_new = mc;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (target && step < 1e-12 && settings.step_shrink_on_class_change) {
                // distinguish a parity wall from plain line-search stall
                auto& cn = candidate.mutable_nodes();
                for (std::size_t k = 1; k + 1 < n; ++k)
                    cn[k] = path.nodes()[k] + dir[k] * 1e-12;
                auto [fc, mc] = obj.value(candidate);
                (void)mc;
                if (std::isfinite(fc) && fc <= f && !parity_matches(candidate))
                    raise(errc::class_change,
                          "parity class flips for every acceptable step length");
            }
            if (!tried_steepest) {
                memory.clear();
                tried_steepest = true;
                continue;
            }
            break;  // objective decrease below the rounding floor
        }
        tried_steepest = false;

        auto grad_new = obj.gradient(candidate);
        std::vector<Vec2> s(n, Vec2{0, 0}), y(n, Vec2{0, 0});
        for (std::size_t k = 0; k < n; ++k) {
            s[k] = candidate.nodes()[k] - path.nodes()[k];
            y[k] = grad_new[k] - grad[k];
        }
        const double sy = detail::dot_of(s, y);
        if (sy > 1e-12 * detail::norm_of(s) * detail::norm_of(y)) {
            memory.emplace_back(std::move(s), std::move(y));
            if (memory.size() > settings.lbfgs_memory) memory.pop_front();
        }

        path = std::move(candidate);
        f = f_new;
        m = m_new;
        grad = std::move(grad_new);
        gnorm = detail::norm_of(grad);
        pot = potential_integral(path, cfg);
        ++iter;
        if (gnorm < best_gnorm * (1.0 - 1e-4)) {
            best_gnorm = gnorm;
            last_improvement = iter;
        }
#ifdef PARASHOOT_MINIMIZE_TRACE
        if (iter % 100 == 0) {
            double closest = 1e300;
            for (std::size_t k = 1; k + 1 < n; ++k)
                closest = std::min(closest, min_centre_distance(cfg, path.nodes()[k]).first);
            std::fprintf(stderr, "iter %zu f=%.12f g=%.3e step=%.2e mind=%.4f\n", iter, f,
                         gnorm, step, closest);
        }
#endif
    }

    // Polish phase: once the objective decrease is buried in rounding noise,
    // the gradient itself is still accurate, so drive ITS norm down instead.
    for (std::size_t polish = 0;
         polish < 400 && gnorm > settings.gradient_tolerance * (1.0 + std::abs(m)); ++polish) {
        std::vector<Vec2> dir = two_loop(grad);
        if (!(detail::dot_of(dir, grad) < 0.0)) {
            memory.clear();
            dir = precondition(grad);
            for (auto& v : dir) v = -v;
        }
        double step = 1.0;
        bool improved = false;
        DiscretePath candidate = path;
        for (int trial = 0; trial < 40; ++trial, step *= 0.5) {
            auto& cn = candidate.mutable_nodes();
            for (std::size_t k = 1; k + 1 < n; ++k)
                cn[k] = path.nodes()[k] + dir[k] * step;
            auto [fc, mc] = obj.value(candidate);
            if (!std::isfinite(fc)) continue;
            if (target && !parity_matches(candidate)) continue;
            auto grad_new = obj.gradient(candidate);
            const double gn = detail::norm_of(grad_new);
            if (gn < gnorm * (1.0 - 1e-3)) {
                std::vector<Vec2> s(n, Vec2{0, 0}), yv(n, Vec2{0, 0});
                for (std::size_t k = 0; k < n; ++k) {
                    s[k] = candidate.nodes()[k] - path.nodes()[k];
                    yv[k] = grad_new[k] - grad[k];
                }
                if (detail::dot_of(s, yv) > 1e-12 * detail::norm_of(s) * detail::norm_of(yv)) {
                    memory.emplace_back(std::move(s), std::move(yv));
                    if (memory.size() > settings.lbfgs_memory) memory.pop_front();
                }
                path = std::move(candidate);
                f = fc;
                m = mc;
                grad = std::move(grad_new);
                gnorm = gn;
                pot = potential_integral(path, cfg);
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }

    if (gnorm > settings.gradient_tolerance * (1.0 + std::abs(m)))
        raise(errc::max_iterations,
              "line search exhausted before gradient tolerance; |grad| = " +
                  std::to_string(gnorm));

    for (std::size_t k = 1; k + 1 < n; ++k) {
        const auto [d, idx] = min_centre_distance(cfg, path.nodes()[k]);
        if (d < rb * (1.0 - 1e-9))
            raise(errc::barrier_saturated,
                  "minimizer pinned at the collision barrier near centre " + std::to_string(idx));
    }
    if (f > f_seed + 1e-9 * (1.0 + std::abs(f_seed)))
        raise(errc::max_iterations, "objective failed to decrease");

    return {std::move(path), m, gnorm, iter, obj.evals};
}

inline MinimizeResult minimize_in_class(const DiscretePath& seed, const ParityClass& target,
                                        const ProblemConfig& cfg,
                                        const MinimizeSettings& settings) {
    if (target.bits.size() != cfg.centre_count())
        raise(errc::domain, "parity class length does not match centre count");
    if (!target.admissible())
        raise(errc::inadmissible_class, "parity class must distinguish two centres");
    return minimize(seed, cfg, settings, target);
}

// ---------------------------------------------------------------------------
// Seed construction

namespace detail {

// Resample a polyline to `segments`+1 nodes spaced by the zero-energy
// parameter measure dt ~ ds / sqrt(2 U), which is how a Maupertuis critical
// point distributes its own uniform-grid nodes.
inline std::vector<Vec2> resample_zero_energy(const std::vector<Vec2>& pts,
                                              const ProblemConfig& cfg,
                                              std::size_t segments) {
    // refine the polyline so the measure is resolved
    std::vector<Vec2> fine;
    double total_len = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) total_len += (pts[i + 1] - pts[i]).norm();
    const double h = total_len / static_cast<double>(8 * segments);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 a = pts[i], b = pts[i + 1];
        const double len = (b - a).norm();
        const std::size_t pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / h)));
        for (std::size_t j = 0; j < pieces; ++j)
            fine.push_back(a + (b - a) * (static_cast<double>(j) / static_cast<double>(pieces)));
    }
    fine.push_back(pts.back());

    std::vector<double> mu(fine.size(), 0.0);
    for (std::size_t i = 0; i + 1 < fine.size(); ++i) {
        const Vec2 mid = (fine[i] + fine[i + 1]) * 0.5;
        const double u = eval_potential(cfg, mid);
        mu[i + 1] = mu[i] + (fine[i + 1] - fine[i]).norm() / std::sqrt(2.0 * u);
    }

    std::vector<Vec2> out;
    out.reserve(segments + 1);
    out.push_back(fine.front());
    std::size_t j = 0;
    for (std::size_t k = 1; k < segments; ++k) {
        const double level = mu.back() * static_cast<double>(k) / static_cast<double>(segments);
        while (j + 2 < mu.size() && mu[j + 1] < level) ++j;
        const double span = mu[j + 1] - mu[j];
        const double f = span > 0.0 ? (level - mu[j]) / span : 0.0;
        out.push_back(fine[j] + (fine[j + 1] - fine[j]) * f);
    }
    out.push_back(fine.back());
    return out;
}

// Push any interior node that landed inside the clearance radius out to it.
inline void enforce_clearance(std::vector<Vec2>& nodes, const ProblemConfig& cfg,
                              double radius) {
    for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
        const auto [d, idx] = min_centre_distance(cfg, nodes[k]);
        if (d < radius) {
            const Vec2 c = cfg.centres()[idx].position;
            const Vec2 dir = d > 1e-14 ? (nodes[k] - c) / d : Vec2{0.0, 1.0};
            nodes[k] = c + dir * (1.05 * radius);
        }
    }
}

}  // namespace detail

// Piecewise-linear representative of a parity class: thread a waypoint past
// each centre, flipping sides in Gray-code order until the measured parity
// matches. Waypoint offsets respect the barrier clearance.
inline DiscretePath seed_path(const Vec2& q_minus, const Vec2& q_plus, const ParityClass& target,
                              const ProblemConfig& cfg, std::size_t segments = 256,
                              const MinimizeSettings& settings = {}) {
    if (target.bits.size() != cfg.centre_count())
        raise(errc::domain, "parity class length does not match centre count");
    if (!target.admissible())
        raise(errc::inadmissible_class, "parity class must distinguish two centres");

    const std::size_t n = cfg.centre_count();
    const double rb = settings.effective_barrier_radius(cfg);
    const Vec2 chord = q_plus - q_minus;
    const Vec2 tangent = chord.normalized();
    const Vec2 normal{-tangent.y, tangent.x};

    // per-centre sideways offset, capped by the local gap
    std::vector<double> offset(n);
    for (std::size_t i = 0; i < n; ++i) {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                gap = std::min(gap, (cfg.centres()[i].position - cfg.centres()[j].position).norm());
        const double cap = std::isfinite(gap) ? 0.4 * gap : 1.0;
        offset[i] = std::max(2.0 * rb, std::min(cap, 1.0));
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dot(cfg.centres()[a].position - q_minus, tangent) <
               dot(cfg.centres()[b].position - q_minus, tangent);
    });

    // Build one candidate from a side choice plus an optional full loop
    // around selected centres. Side flips move the waypoint across the
    // chord; a loop adds one revolution, which is what distinguishes the
    // two parity classes that induce the same partition.
    auto build = [&](std::size_t sides, std::size_t loops) {
        std::vector<Vec2> waypoints{q_minus};
        for (std::size_t i : order) {
            const double side = (sides >> i) & 1 ? -1.0 : 1.0;
            const Vec2 w = cfg.centres()[i].position + normal * (side * offset[i]);
            waypoints.push_back(w);
            if ((loops >> i) & 1) {
                const double phi0 = angle_of(w - cfg.centres()[i].position);
                for (int j = 1; j <= 16; ++j)
                    waypoints.push_back(cfg.centres()[i].position +
                                        from_polar(offset[i], phi0 + 2.0 * M_PI * j / 16.0));
            }
        }
        waypoints.push_back(q_plus);
        auto nodes = detail::resample_zero_energy(waypoints, cfg, segments);
        detail::enforce_clearance(nodes, cfg, rb);
        return DiscretePath(std::move(nodes));
    };

    const std::size_t routings = std::size_t{1} << n;
    for (std::size_t code = 0; code < routings; ++code) {
        const std::size_t gray = code ^ (code >> 1);
        try {
            DiscretePath candidate = build(gray, 0);
            const ParityClass got = parity_class(candidate, cfg, settings.arc_nodes);
            if (got == target) return candidate;
            // add a revolution around every mismatched centre and re-verify
            std::size_t loops = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (got.bits[i] != target.bits[i]) loops |= std::size_t{1} << i;
            DiscretePath looped = build(gray, loops);
            if (parity_class(looped, cfg, settings.arc_nodes) == target) return looped;
        } catch (const solver_error&) {
            // polyline clipped a centre or winding was ill-conditioned; next routing
        }
    }
    raise(errc::no_routing, "no waypoint routing realizes parity class " + target.to_string());
}

// Warm start for a larger endpoint radius: prepend/append radial runs along
// the endpoint directions and redistribute nodes by the zero-energy measure.
inline DiscretePath extend_path_radially(const DiscretePath& previous, const ProblemConfig& cfg,
                                         double new_radius, std::size_t segments) {
    const Vec2 dir_minus = previous.q_minus().normalized();
    const Vec2 dir_plus = previous.q_plus().normalized();
    const double r_old = previous.q_minus().norm();
    if (new_radius <= r_old) raise(errc::domain, "warm start requires a larger radius");

    std::vector<Vec2> pts;
    const std::size_t radial_pieces = 32;
    for (std::size_t j = 0; j <= radial_pieces; ++j) {
        const double f = static_cast<double>(j) / static_cast<double>(radial_pieces);
        pts.push_back(dir_minus * (new_radius + (r_old - new_radius) * f));
    }
    for (std::size_t k = 1; k < previous.nodes().size(); ++k) pts.push_back(previous.nodes()[k]);
    for (std::size_t j = 1; j <= radial_pieces; ++j) {
        const double f = static_cast<double>(j) / static_cast<double>(radial_pieces);
        pts.push_back(dir_plus * (r_old + (new_radius - r_old) * f));
    }
    return DiscretePath(detail::resample_zero_energy(pts, cfg, segments));
}

}  // namespace parashoot

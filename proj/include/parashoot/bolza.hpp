#pragma once

// Packaging of a converged Maupertuis minimizer as a zero-energy trajectory
// on [-omega, omega], with the action recomputed independently from the
// rescaled samples so the sqrt(M) = A/sqrt(2) identity is a real check.

#include <cmath>
#include <vector>

#include "parashoot/error.hpp"
#include "parashoot/homotopy.hpp"
#include "parashoot/potential.hpp"
#include "parashoot/trajectory.hpp"
#include "parashoot/variational.hpp"

namespace parashoot {

struct BolzaSolution {
    DiscretePath path;
    double omega = 0.0;
    double action = 0.0;
    double maupertuis_value = 0.0;
    ParityClass parity;
    Trajectory trajectory;
    double max_energy_residual = 0.0;
    double max_potential = 0.0;
};

namespace detail {

// Velocity samples on the uniform rescaled grid: centred differences plus
// the grid-local correction built from the analytically known acceleration
// a = grad U, which cancels the h^2/6 x''' term of the plain stencil.
inline std::vector<Vec2> grid_velocities(const std::vector<Vec2>& x, double h,
                                         const ProblemConfig& cfg) {
    const std::size_t n = x.size();
    std::vector<Vec2> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = eval_gradient(cfg, x[k]);
    std::vector<Vec2> v(n);
    for (std::size_t k = 1; k + 1 < n; ++k)
        v[k] = (x[k + 1] - x[k - 1]) / (2.0 * h) - (a[k + 1] - a[k - 1]) * (h / 12.0);
    v[0] = (x[0] * -3.0 + x[1] * 4.0 - x[2]) / (2.0 * h) +
           (a[0] * -3.0 + a[1] * 4.0 - a[2]) * (h / 6.0);
    v[n - 1] = (x[n - 1] * 3.0 - x[n - 2] * 4.0 + x[n - 3]) / (2.0 * h) +
               (a[n - 1] * 3.0 - a[n - 2] * 4.0 + a[n - 3]) * (h / 6.0);
    return v;
}

// Composite Simpson over a uniform grid (trapezoid fix-up for an odd last
// interval).
inline double simpson(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    double acc = 0.0;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) acc += h * (f[i] + 4.0 * f[i + 1] + f[i + 2]) / 3.0;
    if (i + 1 < n) acc += h * 0.5 * (f[i] + f[i + 1]);
    return acc;
}

}  // namespace detail

// Rescale a converged minimizer to physical time. Validates the pointwise
// zero-energy residual against energy_budget_fraction * max U and the
// action-Maupertuis identity to 1e-4 relative.
inline BolzaSolution to_trajectory(const DiscretePath& path, const ProblemConfig& cfg,
                                   std::size_t arc_nodes = 128,
                                   double energy_budget_fraction = 1e-3) {
    BolzaSolution sol{path, 0.0, 0.0, 0.0, ParityClass{}, Trajectory{}, 0.0, 0.0};
    sol.omega = omega_of(path, cfg);
    sol.maupertuis_value = maupertuis(path, cfg);
    sol.parity = parity_class(path, cfg, arc_nodes);

    const auto& u = path.nodes();
    const std::size_t n = u.size();
    const double h = sol.omega * path.dt();

    const auto v = detail::grid_velocities(u, h, cfg);
    std::vector<double> lagrangian(n);
    double max_u = 0.0;
    double max_res = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double pot = eval_potential(cfg, u[k]);
        max_u = std::max(max_u, pot);
        max_res = std::max(max_res, std::abs(0.5 * v[k].squared_norm() - pot));
        lagrangian[k] = 0.5 * v[k].squared_norm() + pot;
    }
    sol.max_potential = max_u;
    sol.max_energy_residual = max_res;
    if (max_res > energy_budget_fraction * max_u)
        raise(errc::energy_residual,
              "zero-energy residual " + std::to_string(max_res) + " exceeds budget " +
                  std::to_string(energy_budget_fraction * max_u));

    sol.action = detail::simpson(lagrangian, h);
    const double lhs = sol.action / std::sqrt(2.0);
    const double rhs = std::sqrt(sol.maupertuis_value);
    if (std::abs(lhs - rhs) > 1e-4 * std::abs(rhs))
        raise(errc::energy_residual,
              "action/Maupertuis identity violated: A/sqrt(2) = " + std::to_string(lhs) +
                  " vs sqrt(M) = " + std::to_string(rhs));

    for (std::size_t k = 0; k < n; ++k) {
        const double t = sol.omega * path.parameter_time(k);
        sol.trajectory.push({t, u[k], v[k]}, cfg);
    }
    sol.trajectory.ring_crossings = detect_ring_crossings(sol.trajectory, cfg.ring_radius());
    return sol;
}

}  // namespace parashoot

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "parashoot/integrate.hpp"
#include "parashoot/levi_civita.hpp"

using namespace parashoot;

namespace {

ProblemConfig lone() {
    return ProblemConfig(1.0, {Centre{{0.0, 0.0}, 1.0}});
}

ProblemConfig pair_cfg() {
    return ProblemConfig(1.0, {Centre{{0.0, 0.0}, 1.0}, Centre{{3.0, 0.0}, 1.0}});
}

// zero-energy state at distance d from the first centre, with impact
// parameter chosen so the two-body pericentre is approximately r_peri
State aimed_encounter(const ProblemConfig& cfg, double d, double r_peri) {
    const double m1 = cfg.centres()[0].mass;
    const Vec2 x0 = cfg.centres()[0].position + Vec2{-d, 0.0};
    const double speed = std::sqrt(2.0 * eval_potential(cfg, x0));
    const double h_target = std::sqrt(2.0 * m1 * r_peri);
    const double vy = -h_target / d;  // (x-c) ^ v = -d * vy
    const double vx = std::sqrt(speed * speed - vy * vy);
    return {0.0, x0, {vx, vy}};
}

// fixed-step RK4 with an evaluation budget: the honest "equal work"
// comparison partner for the regularized pass
double fixed_step_drift(const ProblemConfig& cfg, State s, double t_end, std::size_t evals) {
    const std::size_t steps = std::max<std::size_t>(1, evals / 4);
    const double h = (t_end - s.time) / static_cast<double>(steps);
    double drift = 0.0;
    auto acc = [&](const Vec2& x) {
        try {
            return eval_gradient(cfg, x);
        } catch (const solver_error&) {
            return Vec2{0.0, 0.0};
        }
    };
    for (std::size_t i = 0; i < steps; ++i) {
        const Vec2 k1x = s.velocity, k1v = acc(s.position);
        const Vec2 k2x = s.velocity + k1v * (h / 2), k2v = acc(s.position + k1x * (h / 2));
        const Vec2 k3x = s.velocity + k2v * (h / 2), k3v = acc(s.position + k2x * (h / 2));
        const Vec2 k4x = s.velocity + k3v * h, k4v = acc(s.position + k3x * h);
        s.position += (k1x + (k2x + k3x) * 2.0 + k4x) * (h / 6.0);
        s.velocity += (k1v + (k2v + k3v) * 2.0 + k4v) * (h / 6.0);
        s.time += h;
        try {
            drift = std::max(drift, std::abs(s.energy(cfg)));
        } catch (const solver_error&) {
            return 1e300;  // stepped onto the centre
        }
    }
    return drift;
}

}  // namespace

TEST_CASE("lift picks the continuous half-angle branch") {
    auto cfg = lone();
    const double rho = 0.04;
    State right{0.0, {rho, 0.0}, {0.0, std::sqrt(2.0 / rho)}};
    const auto wr = levi_civita_lift(right, 0, cfg);
    CHECK(wr.w.x == Catch::Approx(std::sqrt(rho)).epsilon(1e-12));
    CHECK(wr.w.y == Catch::Approx(0.0).margin(1e-15));

    State left{0.0, {-rho, 0.0}, {0.0, std::sqrt(2.0 / rho)}};
    const auto wl = levi_civita_lift(left, 0, cfg);
    CHECK(wl.w.x == Catch::Approx(0.0).margin(1e-15));
    CHECK(wl.w.y == Catch::Approx(std::sqrt(rho)).epsilon(1e-12));
}

TEST_CASE("lift and drop invert each other") {
    auto cfg = pair_cfg();
    for (double angle : {0.1, 1.7, 3.0, 4.5, 6.0}) {
        const Vec2 x = cfg.centres()[0].position + from_polar(0.02, angle);
        const double speed = std::sqrt(2.0 * eval_potential(cfg, x));
        State s{1.5, x, from_polar(speed, angle + 2.1)};
        const auto lc = levi_civita_lift(s, 0, cfg);
        CHECK(std::abs(lc.energy_invariant(cfg)) <= 1e-12);
        const State back = levi_civita_drop(lc, cfg);
        CHECK((back.position - s.position).norm() <= 1e-12);
        CHECK((back.velocity - s.velocity).norm() <= 1e-12);
        CHECK(back.time == s.time);
    }
}

TEST_CASE("lift rejects non-parabolic states and alpha != 1") {
    auto cfg = lone();
    State bogus{0.0, {0.5, 0.0}, {0.0, 0.1}};
    CHECK_THROWS_AS(levi_civita_lift(bogus, 0, cfg), solver_error);
    ProblemConfig strong(1.5, {Centre{{0.0, 0.0}, 1.0}});
    State ok{0.0, {0.5, 0.0}, {0.0, std::sqrt(2.0 * eval_potential(strong, {0.5, 0.0}))}};
    try {
        levi_civita_lift(ok, 0, strong);
        FAIL("expected wrong-alpha");
    } catch (const solver_error& e) {
        CHECK(e.code() == errc::wrong_alpha);
    }
}

TEST_CASE("exact collision passage: ejection law and reflection") {
    auto cfg = lone();  // U1 vanishes, so w'' = 0 and w(s) = nu s exactly
    const double m1 = 1.0;
    const double s_half = 0.6;
    const Vec2 nu = from_polar(std::sqrt(m1 / 2.0), 0.77);

    LeviCivitaState lc;
    lc.w = nu * (-s_half);
    lc.w_prime = nu;
    lc.centre_index = 0;
    lc.fictitious_time = 0.0;
    // physical time of the collision (s = s_half): t0 + |nu|^2 s^3/3
    const double tau = 0.0;
    lc.physical_time = tau - (m1 / 2.0) * s_half * s_half * s_half / 3.0;

    RegularizedOptions ro;
    ro.min_emit_distance = 1e-10;
    ro.max_step = 0.002;  // dense samples so interpolation resolves the cusp
    auto run = integrate_regularized(lc, 2.0 * s_half, 1e-12, cfg, ro);

    // r(t) = (3 sqrt(m/2) |t - tau|)^(2/3) on both branches
    for (const auto& s : run.segment.samples) {
        const double expected =
            std::pow(3.0 * std::sqrt(m1 / 2.0) * std::abs(s.time - tau), 2.0 / 3.0);
        // below ~1e-4 the subtraction t - tau has fewer than 8 significant
        // digits left, so the law cannot be measured tighter than that
        if (expected < 1e-4) continue;
        CHECK(s.position.norm() == Catch::Approx(expected).epsilon(1e-8));
    }

    // reflection through the collision: x(tau - dt) = x(tau + dt)
    const auto& seg = run.segment;
    const double reach = 0.8 * std::min(tau - seg.t_front(), seg.t_back() - tau);
    for (double f : {0.2, 0.5, 1.0}) {
        const double dt = f * reach;
        const Vec2 before = seg.position_at(tau - dt);
        const Vec2 after = seg.position_at(tau + dt);
        CHECK((before - after).norm() <= 1e-8 * std::max(1.0, before.norm()));
    }

    // endpoint mirrors the start: w(-s) = -w(s) makes x symmetric
    CHECK((run.end.w - nu * s_half).norm() <= 1e-12);
}

TEST_CASE("deep two-centre encounter conserves energy through regularization") {
    auto cfg = pair_cfg();
    const State start = aimed_encounter(cfg, 0.05, 1e-6);

    IntegrateOptions opt;
    opt.tolerance = 1e-12;
    auto run = integrate_cartesian_run(start, 0.05, cfg, opt);
    REQUIRE(run.regularized_passes >= 1);

    double min_d = 1e9;
    for (const auto& [d, idx] : run.trajectory.min_distance_log) min_d = std::min(min_d, d);
    CHECK(min_d < 5e-6);

    CHECK(run.trajectory.max_normalized_energy_residual() <= 1e-8);

    // same work budget spent on naive fixed steps loses the energy badly
    const double naive = fixed_step_drift(cfg, start, 0.05, run.rhs_evaluations);
    CHECK(naive > 1e-3);
}

TEST_CASE("regularized and plain cartesian agree on a resolvable encounter") {
    auto cfg = pair_cfg();
    const State start = aimed_encounter(cfg, 0.05, 2e-3);
    const double t_end = 0.05;

    IntegrateOptions with_reg;
    with_reg.tolerance = 1e-12;
    auto reg = integrate_cartesian_run(start, t_end, cfg, with_reg);
    REQUIRE(reg.regularized_passes >= 1);

    IntegrateOptions plain;
    plain.tolerance = 1e-12;
    plain.switch_radius = 1e-5;  // region never entered at this pericentre
    auto cart = integrate_cartesian_run(start, t_end, cfg, plain);
    CHECK(cart.regularized_passes == 0);

    const Vec2 xa = reg.trajectory.samples.back().position;
    const Vec2 xb = cart.trajectory.samples.back().position;
    CHECK((xa - xb).norm() <= 1e-6);
}

TEST_CASE("overlapping regularization regions are refused") {
    ProblemConfig tight(1.0, {Centre{{0.0, 0.0}, 1.0}, Centre{{0.05, 0.0}, 1.0}});
    LeviCivitaState lc;
    lc.w = {std::sqrt(0.0498), 0.0};
    const double u1 = 1.0 / std::abs(0.0498 - 0.05);
    lc.w_prime = {std::sqrt(0.5 + 0.0498 * u1 / 2.0), 0.0};
    lc.centre_index = 0;
    try {
        integrate_regularized(lc, 1.0, 1e-10, tight);
        FAIL("expected overlap error");
    } catch (const solver_error& e) {
        CHECK(e.code() == errc::overlap_region);
    }
}

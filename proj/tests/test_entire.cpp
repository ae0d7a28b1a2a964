#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "parashoot/entire.hpp"

using namespace parashoot;

namespace {

ScatteringProblem benchmark_problem(double theta_minus = -M_PI_2, double theta_plus = M_PI / 3) {
    ProblemConfig cfg(1.0, {Centre{{-0.5, 0.0}, 1.0}, Centre{{0.5, 0.0}, 1.0}});
    return ScatteringProblem(from_polar(1.0, theta_minus), from_polar(1.0, theta_plus),
                             Partition{{0}}, cfg);
}

}  // namespace

TEST_CASE("single-centre parabolic span angle") {
    // alpha = 1: the parabola's asymptotic directions coincide, angle 2 pi
    const double a1 = kepler_parabolic_angle(1.0, 1.0);
    CHECK(std::abs(a1 - 2.0 * M_PI) <= 0.01 * 2.0 * M_PI);

    // alpha = 3/2 spans 4 pi
    const double a15 = kepler_parabolic_angle(1.5, 1.0);
    CHECK(std::abs(a15 - 4.0 * M_PI) <= 0.01 * 4.0 * M_PI);

    // spanned angle grows with alpha
    const double a13 = kepler_parabolic_angle(1.3, 2.0);
    CHECK(a1 < a13);
    CHECK(a13 < a15);
}

TEST_CASE("log-log fit recovers an exact power law") {
    std::vector<double> t, r;
    for (int k = 0; k < 50; ++k) {
        const double x = 2.0 * std::pow(1.12, k);
        t.push_back(x);
        r.push_back(3.7 * std::pow(x, 0.6666));
    }
    const auto fit = detail::loglog_fit(t, r);
    CHECK(fit.slope == Catch::Approx(0.6666).epsilon(1e-9));
    CHECK(std::exp(fit.intercept) == Catch::Approx(3.7).epsilon(1e-9));
    CHECK(fit.rms <= 1e-12);
}

TEST_CASE("self-intersection checker") {
    ProblemConfig cfg(1.0, {Centre{{10.0, 10.0}, 1.0}});
    Trajectory eight;
    // figure eight: crosses itself exactly once at the origin
    for (int k = 0; k <= 200; ++k) {
        const double t = 2.0 * M_PI * k / 200.0;
        eight.push({static_cast<double>(k), {std::sin(2.0 * t) + 2e-3 * t, std::sin(t)},
                    {1.0, 0.0}},
                   cfg);
    }
    CHECK(self_intersection_check(eight).size() == 1);

    Trajectory line;
    for (int k = 0; k <= 50; ++k)
        line.push({static_cast<double>(k), {0.1 * k, 0.2 * k + 1.0}, {1, 2}}, cfg);
    CHECK(self_intersection_check(line).empty());
}

TEST_CASE("radial escape keeps its direction") {
    ProblemConfig cfg(1.0, {Centre{{0.0, 0.0}, 1.0}});
    State start{0.0, {1.0, 0.0}, {std::sqrt(2.0), 0.0}};
    auto traj = integrate_cartesian(start, 100.0, 1e-10, cfg);
    for (const auto& s : traj.samples) {
        CHECK(std::abs(cross(s.position, s.velocity)) <= 1e-9);
        CHECK(s.position.normalized().x == Catch::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("bolza solve centres the ring crossings and separates the pair") {
    const auto prob = benchmark_problem();
    EntireSettings settings;
    const auto run = solve_bolza_at(10.0, prob, std::nullopt, settings);

    CHECK(run.ring_enter == Catch::Approx(-run.ring_exit).margin(1e-8));
    CHECK(run.solution.trajectory.ring_crossings.size() == 2);
    CHECK(separates(run.solution.path, prob.partition, prob.cfg));
    CHECK(run.solution.parity == prob.target_class());
    CHECK(self_intersection_check(run.solution.trajectory).empty());
    CHECK(run.solution.max_energy_residual <= 1e-3 * run.solution.max_potential);

    // ring crossings bracket the interior: radial speed negative then positive
    const auto& tr = run.solution.trajectory;
    auto rdot = [&](double t) {
        const State s = tr.state_at(t);
        return dot(s.position, s.velocity) / s.position.norm();
    };
    CHECK(rdot(run.ring_enter) < 0.0);
    CHECK(rdot(run.ring_exit) > 0.0);
}

TEST_CASE("warm start reuses the previous minimizer") {
    const auto prob = benchmark_problem();
    EntireSettings settings;
    const auto base = solve_bolza_at(10.0, prob, std::nullopt, settings);
    const auto warm = solve_bolza_at(20.0, prob, base.solution.path, settings, 512);
    const auto cold = solve_bolza_at(20.0, prob, std::nullopt, settings, 512);
    CHECK(warm.solution.parity == cold.solution.parity);
    CHECK(warm.iterations < cold.iterations);
    CHECK(warm.solution.maupertuis_value ==
          Catch::Approx(cold.solution.maupertuis_value).epsilon(1e-4));
}

TEST_CASE("two-step continuation converges on the window") {
    const auto prob = benchmark_problem();
    EntireSettings settings;
    settings.base_nodes = 192;
    const auto result = continue_in_radius(prob, {10.0, 20.0, 40.0}, settings);

    REQUIRE(result.runs.size() == 3);
    REQUIRE(result.sup_deviations.size() == 2);
    CHECK(result.sup_deviations.back() < result.sup_deviations.front());
    CHECK(result.window > 0.0);

    for (const auto& run : result.runs)
        CHECK(separates(run.solution.path, prob.partition, prob.cfg));

    // inside-ring action stays bounded along the schedule
    double max_a = 0.0, min_a = 1e300;
    for (double a : result.inside_actions) {
        max_a = std::max(max_a, a);
        min_a = std::min(min_a, a);
    }
    CHECK(max_a < 2.0 * min_a + 1e-9);

    // asymptotic-direction error shrinks as R grows
    double prev = 1e300;
    for (const auto& run : result.runs) {
        const auto dirs = asymptotic_directions(run.solution.trajectory, prob.cfg);
        const double err = (dirs.dir_plus - prob.dir_plus).norm() +
                           (dirs.dir_minus - prob.dir_minus).norm();
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("extended tails support the asymptotic fits") {
    const auto prob = benchmark_problem();
    EntireSettings settings;
    const auto run = solve_bolza_at(12.0, prob, std::nullopt, settings);
    const auto extended = extend_tails(run.solution.trajectory, prob.cfg, 400.0, 1e-11);

    REQUIRE(extended.t_back() > 10.0 * std::max(1.0, run.ring_exit));
    const auto fit = fit_radius_law(extended, prob.cfg);
    // m = 2, alpha = 1: r ~ (3 sqrt(m/2))^(2/3) t^(2/3)
    CHECK(fit.exponent == Catch::Approx(2.0 / 3.0).epsilon(0.05));
    CHECK(fit.coefficient == Catch::Approx(std::pow(3.0, 2.0 / 3.0)).epsilon(0.08));

    const auto dirs = asymptotic_directions(extended, prob.cfg);
    CHECK(dirs.decay_exponent_plus == Catch::Approx(4.0 / 3.0).epsilon(0.2));

    // short tails are refused
    CHECK_THROWS_AS(fit_radius_law(run.solution.trajectory, prob.cfg), solver_error);
}

TEST_CASE("collapse deviations shrink with eps") {
    const auto prob = benchmark_problem();
    EntireSettings settings;
    const auto run = solve_bolza_at(10.0, prob, std::nullopt, settings);
    const auto extended = extend_tails(run.solution.trajectory, prob.cfg, 500.0, 1e-11);

    const auto rows = collapse_experiment(extended, prob.cfg, prob.dir_minus, prob.dir_plus,
                                          {0.2, 0.1, 0.05}, 1.0, 51);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].deviation > rows[1].deviation);
    CHECK(rows[1].deviation > rows[2].deviation);

    // a window that cannot cover the rescaled probes is refused
    CHECK_THROWS_AS(collapse_experiment(run.solution.trajectory, prob.cfg, prob.dir_minus,
                                        prob.dir_plus, {0.01}, 2.5, 11),
                    solver_error);
}

TEST_CASE("scattering problem validation") {
    ProblemConfig cfg(1.0, {Centre{{-0.5, 0.0}, 1.0}, Centre{{0.5, 0.0}, 1.0}});
    CHECK_THROWS_AS(ScatteringProblem(Vec2{0, 1}, Vec2{0, 1}, Partition{{0}}, cfg),
                    solver_error);
    CHECK_THROWS_AS(ScatteringProblem(Vec2{0, -1}, Vec2{0, 1}, Partition{{0, 1}}, cfg),
                    solver_error);
    const auto prob = benchmark_problem();
    CHECK_THROWS_AS(solve_bolza_at(1.0, prob, std::nullopt), solver_error);
}

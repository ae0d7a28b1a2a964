#pragma once

// Run configuration: a single JSON file with nested sections. Unknown keys
// are rejected so a typo cannot silently fall back to a default, and all
// module preconditions are validated at load time.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "parashoot/entire.hpp"
#include "parashoot/error.hpp"
#include "parashoot/homotopy.hpp"
#include "parashoot/minimize.hpp"
#include "parashoot/potential.hpp"

namespace parashoot {

struct ScatteringConfig {
    double theta_minus = 0.0;
    double theta_plus = 0.0;
    Partition partition;
    double radius = 0.0;  // endpoint radius for single Bolza solves
};

struct ScanConfig {
    std::vector<double> angles{0.0, M_PI_2, M_PI, 3.0 * M_PI_2};
    double radius_factor = 4.0;
};

struct CollapseConfig {
    std::vector<double> eps{0.2, 0.1, 0.05};
    double probe_span = 2.5;
    std::size_t probe_points = 101;
};

struct ContinuationConfig {
    std::vector<double> schedule;        // explicit radii; wins over ring_factors
    std::vector<double> ring_factors{4.0, 8.0, 16.0, 32.0};
    double tail_radius = 0.0;            // 0 -> 25 x largest radius
    std::size_t probe_points = 257;
};

struct KeplerConfig {
    double alpha = 0.0;  // 0 -> problem alpha
    double mass = 0.0;   // 0 -> problem far mass
    double radius_growth = 1e4;
};

struct RunConfig {
    ProblemConfig problem;
    std::optional<ScatteringConfig> scattering;
    MinimizeSettings solver;
    std::size_t solver_nodes = 256;
    std::size_t solver_restarts = 1;
    ContinuationConfig continuation;
    CollapseConfig collapse;
    ScanConfig scan;
    KeplerConfig kepler;
    double integrator_tolerance = 1e-10;
    double switch_radius = 0.0;
    std::string output_directory = "out";
    bool write_svg = true;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;

    std::vector<double> schedule() const {
        if (!continuation.schedule.empty()) return continuation.schedule;
        std::vector<double> out;
        for (double f : continuation.ring_factors) out.push_back(f * problem.ring_radius());
        return out;
    }

    double tail_radius() const {
        if (continuation.tail_radius > 0.0) return continuation.tail_radius;
        const auto sched = schedule();
        return 25.0 * sched.back();
    }

    ScatteringProblem scattering_problem() const {
        if (!scattering) raise(errc::config, "config lacks a [scattering] section");
        return ScatteringProblem(from_polar(1.0, scattering->theta_minus),
                                 from_polar(1.0, scattering->theta_plus),
                                 scattering->partition, problem);
    }

    EntireSettings entire_settings() const {
        EntireSettings s;
        s.solver = solver;
        s.base_nodes = solver_nodes;
        s.probe_points = continuation.probe_points;
        s.integrator_tolerance = integrator_tolerance;
        return s;
    }
};

inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail {

using json = nlohmann::json;

inline void expect_keys(const json& j, const std::string& section,
                        const std::set<std::string>& allowed) {
    if (!j.is_object()) raise(errc::config, "section '" + section + "' must be an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            raise(errc::config, "unknown key '" + key + "' in section '" + section + "'");
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        raise(errc::config, "bad value for '" + key + "': " + e.what());
    }
}

inline ProblemConfig parse_problem(const json& j) {
    expect_keys(j, "problem", {"alpha", "centres", "ring_radius"});
    if (!j.contains("alpha") || !j.contains("centres"))
        raise(errc::config, "problem section needs 'alpha' and 'centres'");
    std::vector<Centre> centres;
    for (const auto& cj : j.at("centres")) {
        expect_keys(cj, "problem.centres[]", {"position", "mass"});
        if (!cj.contains("position")) raise(errc::config, "centre needs a position");
        const auto pos = cj.at("position").get<std::vector<double>>();
        if (pos.size() != 2) raise(errc::config, "centre positions are 2-vectors");
        centres.push_back({{pos[0], pos[1]}, get_or(cj, "mass", 1.0)});
    }
    return ProblemConfig(j.at("alpha").get<double>(), std::move(centres),
                         get_or(j, "ring_radius", 0.0));
}

}  // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(errc::config, std::string("config is not valid JSON: ") + e.what());
    }
    detail::expect_keys(j, "<root>",
                        {"problem", "scattering", "solver", "continuation", "collapse", "scan",
                         "kepler", "integrator", "output", "seed"});
    if (!j.contains("problem")) raise(errc::config, "config needs a 'problem' section");

    RunConfig cfg{detail::parse_problem(j.at("problem"))};
    cfg.config_hash = fnv1a64(text);

    if (j.contains("scattering")) {
        const auto& s = j.at("scattering");
        detail::expect_keys(s, "scattering",
                            {"theta_minus", "theta_plus", "partition", "radius"});
        ScatteringConfig sc;
        sc.theta_minus = detail::get_or(s, "theta_minus", 0.0);
        sc.theta_plus = detail::get_or(s, "theta_plus", 0.0);
        if (s.contains("partition"))
            for (auto idx : s.at("partition").get<std::vector<std::size_t>>())
                sc.partition.members.insert(idx);
        sc.radius = detail::get_or(s, "radius", 0.0);
        cfg.scattering = sc;
        // validate module preconditions now rather than at solve time
        sc.partition.validate(cfg.problem.centre_count());
        if ((from_polar(1.0, sc.theta_minus) - from_polar(1.0, sc.theta_plus)).norm() < 1e-12)
            raise(errc::config, "scattering directions must differ");
    }

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        detail::expect_keys(s, "solver",
                            {"nodes", "gradient_tolerance", "max_iterations", "barrier_strength",
                             "barrier_radius", "arc_nodes", "restarts"});
        cfg.solver_nodes = detail::get_or<std::size_t>(s, "nodes", 256);
        cfg.solver.gradient_tolerance = detail::get_or(s, "gradient_tolerance", 1e-8);
        cfg.solver.max_iterations = detail::get_or<std::size_t>(s, "max_iterations", 50000);
        cfg.solver.barrier_strength = detail::get_or(s, "barrier_strength", 1e4);
        cfg.solver.barrier_radius = detail::get_or(s, "barrier_radius", 0.0);
        cfg.solver.arc_nodes = detail::get_or<std::size_t>(s, "arc_nodes", 128);
        cfg.solver_restarts = detail::get_or<std::size_t>(s, "restarts", 1);
        if (cfg.solver_nodes < 8 || cfg.solver_nodes % 2 != 0)
            raise(errc::config, "solver.nodes must be even and at least 8");
    }
    cfg.solver.validate(cfg.problem);

    if (j.contains("continuation")) {
        const auto& s = j.at("continuation");
        detail::expect_keys(s, "continuation",
                            {"schedule", "ring_factors", "tail_radius", "probe_points"});
        cfg.continuation.schedule = detail::get_or(s, "schedule", std::vector<double>{});
        cfg.continuation.ring_factors =
            detail::get_or(s, "ring_factors", cfg.continuation.ring_factors);
        cfg.continuation.tail_radius = detail::get_or(s, "tail_radius", 0.0);
        cfg.continuation.probe_points =
            detail::get_or<std::size_t>(s, "probe_points", 257);
    }

    if (j.contains("collapse")) {
        const auto& s = j.at("collapse");
        detail::expect_keys(s, "collapse", {"eps", "probe_span", "probe_points"});
        cfg.collapse.eps = detail::get_or(s, "eps", cfg.collapse.eps);
        cfg.collapse.probe_span = detail::get_or(s, "probe_span", 2.5);
        cfg.collapse.probe_points = detail::get_or<std::size_t>(s, "probe_points", 101);
        for (double e : cfg.collapse.eps)
            if (!(e > 0.0 && e < 1.0)) raise(errc::config, "collapse eps must lie in (0,1)");
    }

    if (j.contains("scan")) {
        const auto& s = j.at("scan");
        detail::expect_keys(s, "scan", {"angles", "radius_factor"});
        cfg.scan.angles = detail::get_or(s, "angles", cfg.scan.angles);
        cfg.scan.radius_factor = detail::get_or(s, "radius_factor", 4.0);
        if (cfg.scan.angles.size() < 2) raise(errc::config, "scan needs at least two angles");
        if (cfg.problem.centre_count() > 12)
            raise(errc::config, "scan partition enumeration is limited to 12 centres");
    }

    if (j.contains("kepler")) {
        const auto& s = j.at("kepler");
        detail::expect_keys(s, "kepler", {"alpha", "mass", "radius_growth"});
        cfg.kepler.alpha = detail::get_or(s, "alpha", 0.0);
        cfg.kepler.mass = detail::get_or(s, "mass", 0.0);
        cfg.kepler.radius_growth = detail::get_or(s, "radius_growth", 1e4);
    }

    if (j.contains("integrator")) {
        const auto& s = j.at("integrator");
        detail::expect_keys(s, "integrator", {"tolerance", "switch_radius"});
        cfg.integrator_tolerance = detail::get_or(s, "tolerance", 1e-10);
        cfg.switch_radius = detail::get_or(s, "switch_radius", 0.0);
        if (!(cfg.integrator_tolerance > 0.0))
            raise(errc::config, "integrator tolerance must be positive");
    }

    if (j.contains("output")) {
        const auto& s = j.at("output");
        detail::expect_keys(s, "output", {"directory", "svg"});
        cfg.output_directory = detail::get_or<std::string>(s, "directory", "out");
        cfg.write_svg = detail::get_or(s, "svg", true);
    }

    cfg.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io, "cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

}  // namespace parashoot

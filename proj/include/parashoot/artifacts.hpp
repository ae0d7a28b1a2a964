#pragma once

// Batch artifacts: trajectory CSV, summary JSON, and SVG orbit plots.
// Every file embeds the config hash and tool version. Output is
// deterministic for a fixed config and seed; no timestamps, no locales.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "parashoot/error.hpp"
#include "parashoot/potential.hpp"
#include "parashoot/trajectory.hpp"
#include "parashoot/version.hpp"

namespace parashoot {

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) raise(errc::io, "cannot create output directory " + dir.string());
}

inline void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj,
                                 std::uint64_t config_hash) {
    std::ofstream out(file);
    if (!out) raise(errc::io, "cannot write " + file.string());
    out << "# " << kToolName << " " << kToolVersion << "\n";
    out << "# config_hash=" << hash_hex(config_hash) << "\n";
    out << "t,x,y,vx,vy,energy_residual,min_centre_dist\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& s = traj.samples[i];
        out << format_g17(s.time) << ',' << format_g17(s.position.x) << ','
            << format_g17(s.position.y) << ',' << format_g17(s.velocity.x) << ','
            << format_g17(s.velocity.y) << ',' << format_g17(traj.energy_residuals[i]) << ','
            << format_g17(traj.min_distance_log[i].first) << "\n";
    }
}

struct CsvTrajectory {
    std::vector<double> t, x, y, vx, vy;
};

inline CsvTrajectory read_trajectory_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) raise(errc::io, "cannot read " + file.string());
    CsvTrajectory out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        double v[7];
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3],
                        &v[4], &v[5], &v[6]) != 7)
            raise(errc::io, "malformed CSV row in " + file.string());
        out.t.push_back(v[0]);
        out.x.push_back(v[1]);
        out.y.push_back(v[2]);
        out.vx.push_back(v[3]);
        out.vy.push_back(v[4]);
    }
    return out;
}

inline void write_json(const std::filesystem::path& file, nlohmann::json j,
                       std::uint64_t config_hash) {
    j["tool"] = std::string(kToolName) + " " + kToolVersion;
    j["config_hash"] = hash_hex(config_hash);
    std::ofstream out(file);
    if (!out) raise(errc::io, "cannot write " + file.string());
    out << j.dump(2) << "\n";
}

// Minimal standalone SVG: trajectory polylines, centres, the diagnostic
// ring, and endpoint markers. Derived artifact only, never parsed back.
inline void write_orbit_svg(const std::filesystem::path& file,
                            const std::vector<std::vector<Vec2>>& polylines,
                            const ProblemConfig& cfg, std::uint64_t config_hash) {
    double lo_x = -cfg.ring_radius(), hi_x = cfg.ring_radius();
    double lo_y = lo_x, hi_y = hi_x;
    for (const auto& poly : polylines) {
        for (const auto& p : poly) {
            lo_x = std::min(lo_x, p.x);
            hi_x = std::max(hi_x, p.x);
            lo_y = std::min(lo_y, p.y);
            hi_y = std::max(hi_y, p.y);
        }
    }
    const double span = std::max(hi_x - lo_x, hi_y - lo_y);
    const double pad = 0.05 * span;
    const double size = 800.0;
    const double scale = size / (span + 2 * pad);
    auto px = [&](const Vec2& p) {
        return Vec2{(p.x - lo_x + pad) * scale, size - (p.y - lo_y + pad) * scale};
    };

    std::ofstream out(file);
    if (!out) raise(errc::io, "cannot write " + file.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
        << "viewBox=\"0 0 800 800\">\n";
    out << "<!-- " << kToolName << " " << kToolVersion << " config_hash="
        << hash_hex(config_hash) << " -->\n";
    out << "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";

    const Vec2 origin_px = px({0.0, 0.0});
    out << "<circle cx=\"" << origin_px.x << "\" cy=\"" << origin_px.y << "\" r=\""
        << cfg.ring_radius() * scale
        << "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"6 4\"/>\n";

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    for (std::size_t i = 0; i < polylines.size(); ++i) {
        out << "<polyline fill=\"none\" stroke=\"" << palette[i % 5]
            << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : polylines[i]) {
            const Vec2 q = px(p);
            out << q.x << ',' << q.y << ' ';
        }
        out << "\"/>\n";
    }
    for (const auto& c : cfg.centres()) {
        const Vec2 q = px(c.position);
        out << "<circle cx=\"" << q.x << "\" cy=\"" << q.y
            << "\" r=\"5\" fill=\"black\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace parashoot

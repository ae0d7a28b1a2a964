#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "parashoot/homotopy.hpp"

using namespace parashoot;

namespace {

ProblemConfig twin() {
    return ProblemConfig(1.0, {Centre{{-0.5, 0.0}, 1.0}, Centre{{0.5, 0.0}, 1.0}});
}

// straight polyline between two points
std::vector<Vec2> segment(const Vec2& a, const Vec2& b, std::size_t n = 64) {
    std::vector<Vec2> out;
    for (std::size_t k = 0; k <= n; ++k)
        out.push_back(a + (b - a) * (static_cast<double>(k) / n));
    return out;
}

// independent winding oracle: dense angle summation around `p`
double brute_winding(const std::vector<Vec2>& closed, const Vec2& p) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < closed.size(); ++i) {
        const Vec2 a = closed[i] - p;
        const Vec2 b = closed[i + 1] - p;
        total += std::atan2(cross(a, b), dot(a, b));
    }
    return total / (2.0 * M_PI);
}

}  // namespace

TEST_CASE("closure arc picks the counterclockwise branch") {
    // horizontal diameter: theta- = pi, theta+ = 0 -> upper semicircle
    auto closed = close_polyline(segment({-5, 0}, {5, 0}), 128);
    double max_y = -1e9;
    for (std::size_t i = 65; i < closed.vertices.size(); ++i)
        max_y = std::max(max_y, closed.vertices[i].y);
    CHECK(max_y == Catch::Approx(5.0).epsilon(1e-3));
    CHECK(closed.vertices.front() == closed.vertices.back());

    // theta- = pi/2 < theta+ = 3pi/2: arc sweeps through 2 pi (right half plane)
    auto wrapped = close_polyline(segment({0, 5}, {0, -5}), 128);
    double max_x = -1e9;
    for (std::size_t i = 65; i < wrapped.vertices.size(); ++i)
        max_x = std::max(max_x, wrapped.vertices[i].x);
    CHECK(max_x == Catch::Approx(5.0).epsilon(1e-3));
}

TEST_CASE("closure rejects bad endpoints") {
    CHECK_THROWS_AS(close_polyline(segment({-5, 0}, {4, 0})), solver_error);
    std::vector<Vec2> loop = segment({-5, 0}, {5, 0});
    loop.push_back({-5, 0});
    CHECK_THROWS_AS(close_polyline(loop), solver_error);
}

TEST_CASE("winding number on simple shapes") {
    ClosedPolyline square;
    square.vertices = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}, {1, 1}};
    CHECK(winding_number(square, {0, 0}) == 1);
    CHECK(winding_number(square, {5, 5}) == 0);
    CHECK_THROWS_AS(winding_number(square, {1.0, 0.0}), solver_error);

    // doubly traversed loop counts twice; checked against the angle oracle
    ClosedPolyline twice;
    for (int lap = 0; lap < 2; ++lap)
        for (int k = 0; k < 32; ++k)
            twice.vertices.push_back(from_polar(2.0, 2.0 * M_PI * k / 32.0));
    twice.vertices.push_back(twice.vertices.front());
    CHECK(winding_number(twice, {0, 0}) == 2);
    CHECK(brute_winding(twice.vertices, {0, 0}) == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("parity classes of reference paths") {
    auto cfg = twin();

    // straight pass between the centres separates them
    auto between = parity_of_polyline(segment({0, -5}, {0, 5}), cfg);
    REQUIRE(between.bits.size() == 2);
    CHECK(between.bits[0] != between.bits[1]);
    CHECK(between.admissible());

    // a detour dipping below the axis encloses both centres once: bits (1,1)
    std::vector<Vec2> dip = segment({-5, 0}, {-2, 0}, 16);
    for (int k = 1; k < 32; ++k)
        dip.push_back(from_polar(2.0, M_PI + M_PI * k / 32.0));
    auto tail = segment({2, 0}, {5, 0}, 16);
    dip.insert(dip.end(), tail.begin(), tail.end());
    auto low = parity_of_polyline(dip, cfg);
    CHECK(low.bits[0] == 1);
    CHECK(low.bits[1] == 1);
    CHECK_FALSE(low.admissible());

    // the same detour over the top encloses neither: bits equal again
    std::vector<Vec2> hump = segment({-5, 0}, {-2, 0}, 16);
    for (int k = 1; k < 32; ++k)
        hump.push_back(from_polar(2.0, M_PI - M_PI * k / 32.0));
    hump.insert(hump.end(), tail.begin(), tail.end());
    auto high = parity_of_polyline(hump, cfg);
    CHECK(high.bits[0] == high.bits[1]);

    // far-away pass encloses nothing
    auto far = parity_of_polyline(segment({-5, 0}, {0, 5}), cfg);
    CHECK((far.bits[0] == 0 && far.bits[1] == 0));
}

TEST_CASE("parity is stable under arc refinement and node jitter") {
    auto cfg = twin();
    auto path = segment({0, -5}, {0, 5});
    const auto p64 = parity_of_polyline(path, cfg, 64);
    const auto p128 = parity_of_polyline(path, cfg, 128);
    CHECK(p64 == p128);

    // perturb interior nodes by less than half the clearance
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    auto wobble = path;
    for (std::size_t k = 1; k + 1 < wobble.size(); ++k)
        wobble[k] += Vec2{jitter(rng), jitter(rng)};
    CHECK(parity_of_polyline(wobble, cfg) == p128);
}

TEST_CASE("reversing a path flips every winding") {
    auto cfg = twin();
    std::vector<Vec2> path = segment({0, -5}, {0, 5});
    auto closed = close_polyline(path);
    std::vector<Vec2> reversed(path.rbegin(), path.rend());
    auto closed_rev = close_polyline(reversed);
    for (const auto& c : cfg.centres()) {
        const int w_fwd = winding_number(closed, c.position);
        (void)w_fwd;
        // reversal maps the closure to a different arc, but parity-wise the
        // winding of the reversed open path negates edge by edge
        double fwd = 0.0, bwd = 0.0;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            const Vec2 a = path[i] - c.position, b = path[i + 1] - c.position;
            fwd += std::atan2(cross(a, b), dot(a, b));
        }
        for (std::size_t i = 0; i + 1 < reversed.size(); ++i) {
            const Vec2 a = reversed[i] - c.position, b = reversed[i + 1] - c.position;
            bwd += std::atan2(cross(a, b), dot(a, b));
        }
        CHECK(fwd == Catch::Approx(-bwd).margin(1e-12));
    }
}

TEST_CASE("winding additivity under loop concatenation") {
    // two ccw unit loops sharing the basepoint (2,0), concatenated
    auto loop_at = [](const Vec2& c) {
        std::vector<Vec2> v;
        for (int k = 0; k <= 48; ++k)
            v.push_back(c + from_polar(1.0, 2.0 * M_PI * k / 48.0));
        return v;
    };
    ClosedPolyline a, b, ab;
    a.vertices = loop_at({1, 0});
    b.vertices = loop_at({1, 0});
    ab.vertices = a.vertices;
    ab.vertices.insert(ab.vertices.end(), b.vertices.begin(), b.vertices.end());
    const Vec2 probe{0.5, 0.0};
    CHECK(winding_number(ab, probe) ==
          winding_number(a, probe) + winding_number(b, probe));
}

TEST_CASE("partition to class and separation") {
    auto cfg = twin();
    CHECK(partition_to_class(Partition{{0}}, 2).bits == std::vector<std::uint8_t>{1, 0});
    CHECK(partition_to_class(Partition{{0, 2}}, 3).bits == std::vector<std::uint8_t>{1, 0, 1});
    CHECK_THROWS_AS(partition_to_class(Partition{{0, 1}}, 2), solver_error);
    CHECK_THROWS_AS(partition_to_class(Partition{{}}, 2), solver_error);

    auto between = segment({0, -5}, {0, 5});
    CHECK(separates_polyline(between, Partition{{0}}, cfg));
    CHECK(separates_polyline(between, Partition{{1}}, cfg));  // complement symmetric
    auto far = segment({-5, 0}, {0, 5});
    CHECK_FALSE(separates_polyline(far, Partition{{0}}, cfg));
}

#include <doctest.h>

#include <random>

#include "bplan/planner.hpp"
#include "bplan/smoothing.hpp"
#include "support/oracles.hpp"

using namespace bplan;
using smoothing::fit_bezier_chain;
using smoothing::sample_curve;

TEST_SUITE_BEGIN("smoothing");

namespace {

std::vector<Point3> random_path(std::mt19937_64& gen, int n) {
    auto u = [&] { return 3.0 * static_cast<double>(gen() >> 11) * 0x1.0p-53 + 0.1; };
    std::vector<Point3> path;
    for (int i = 0; i < n; ++i) path.push_back({u(), u(), u()});
    return path;
}

}  // namespace

TEST_CASE("two collinear waypoints degenerate to the chord") {
    std::vector<Point3> path{{0, 0, 0}, {2, 1, 0.5}};
    auto smooth = fit_bezier_chain(path, 1.0 / 3.0);
    REQUIRE(smooth.segments.size() == 1);
    Vec3 chord = path[1] - path[0];
    for (double t : {0.1, 0.37, 0.5, 0.92}) {
        Point3 p = smooth.segments[0].eval(t);
        Vec3 d = p - path[0];
        CHECK(d.cross(chord).norm() < 1e-12);  // collinear with the chord
    }
    CHECK_THROWS_AS(fit_bezier_chain({{0, 0, 0}}, 1.0 / 3.0), TooFewWaypointsError);
}

TEST_CASE("chain interpolates every knot at segment ends") {
    std::mt19937_64 gen(2);
    for (int trial = 0; trial < 20; ++trial) {
        auto path = random_path(gen, 3 + static_cast<int>(gen() % 6));
        auto smooth = fit_bezier_chain(path, 1.0 / 3.0);
        REQUIRE(smooth.segments.size() == path.size() - 1);
        for (size_t s = 0; s < smooth.segments.size(); ++s) {
            CHECK(distance(smooth.segments[s].eval(0.0), path[s]) < 1e-12);
            CHECK(distance(smooth.segments[s].eval(1.0), path[s + 1]) < 1e-12);
        }
    }
}

TEST_CASE("right-angle three-knot case matches the hand-evaluated control points") {
    std::vector<Point3> path{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}};
    auto smooth = fit_bezier_chain(path, 1.0 / 3.0);
    REQUIRE(smooth.segments.size() == 2);
    // joint tangent = ((1,1,0) - (0,0,0)) / 2 = (0.5, 0.5, 0)
    Point3 p2 = smooth.segments[0].p2;
    CHECK(distance(p2, {1.0 - 0.5 / 3.0, -0.5 / 3.0, 0.0}) < 1e-12);
    Point3 p1_right = smooth.segments[1].p1;
    CHECK(distance(p1_right, {1.0 + 0.5 / 3.0, 0.5 / 3.0, 0.0}) < 1e-12);
}

TEST_CASE("sample_curve: n = 2 returns exactly the knot sequence") {
    std::vector<Point3> path{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {2, 1, 1}};
    auto smooth = fit_bezier_chain(path, 0.25);
    auto samples = sample_curve(smooth, 2);
    REQUIRE(samples.size() == path.size());
    for (size_t i = 0; i < path.size(); ++i) CHECK(distance(samples[i], path[i]) < 1e-12);
    CHECK_THROWS_AS(sample_curve(smooth, 1), Error);
}

TEST_CASE("polynomial evaluation agrees with de Casteljau at random parameters") {
    std::mt19937_64 gen(5);
    auto path = random_path(gen, 6);
    auto smooth = fit_bezier_chain(path, 1.0 / 3.0);
    auto u01 = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < 100; ++i) {
        const auto& seg = smooth.segments[gen() % smooth.segments.size()];
        double t = u01();
        Point3 direct = seg.eval(t);
        Point3 dc = oracle::de_casteljau(seg.p0, seg.p1, seg.p2, seg.p3, t);
        CHECK(distance(direct, dc) < 1e-12);
    }
}

TEST_CASE("degenerate all-collinear path samples stay on the line") {
    std::vector<Point3> path;
    for (int i = 0; i < 5; ++i) path.push_back({0.5 * i, 0.25 * i, 0.125 * i});
    auto smooth = fit_bezier_chain(path, 1.0 / 3.0);
    Vec3 dir = (path.back() - path.front()).normalized();
    for (const auto& p : sample_curve(smooth, 9)) {
        Vec3 d = p - path.front();
        CHECK(d.cross(dir).norm() < 1e-12);
    }
}

TEST_CASE("C1 joints: one-sided finite-difference tangents agree") {
    std::mt19937_64 gen(13);
    for (int trial = 0; trial < 10; ++trial) {
        auto path = random_path(gen, 5);
        auto smooth = fit_bezier_chain(path, 1.0 / 3.0);
        const double h = 1e-8;
        for (size_t s = 0; s + 1 < smooth.segments.size(); ++s) {
            Point3 left_end = smooth.segments[s].eval(1.0);
            Point3 left_near = smooth.segments[s].eval(1.0 - h);
            Point3 right_start = smooth.segments[s + 1].eval(0.0);
            Point3 right_near = smooth.segments[s + 1].eval(h);
            Vec3 tl = (left_end - left_near) / h;
            Vec3 tr = (right_near - right_start) / h;
            CHECK(distance(tl, tr) < 1e-6);
        }
    }
}

TEST_CASE("convex hull property via Bernstein weights") {
    std::mt19937_64 gen(21);
    auto u01 = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 100; ++trial) {
        auto path = random_path(gen, 4);
        auto smooth = fit_bezier_chain(path, 0.2 + 0.3 * u01());
        const auto& seg = smooth.segments[gen() % smooth.segments.size()];
        double t = u01();
        double w0 = (1 - t) * (1 - t) * (1 - t), w1 = 3 * (1 - t) * (1 - t) * t,
               w2 = 3 * (1 - t) * t * t, w3 = t * t * t;
        CHECK(w0 >= 0);
        CHECK(w1 >= 0);
        CHECK(w2 >= 0);
        CHECK(w3 >= 0);
        CHECK(w0 + w1 + w2 + w3 == doctest::Approx(1.0).epsilon(1e-12));
        Point3 combo = seg.p0 * w0 + seg.p1 * w1 + seg.p2 * w2 + seg.p3 * w3;
        CHECK(distance(combo, seg.eval(t)) < 1e-12);
    }
}

TEST_CASE("validate_smooth: free maps pass, corner-cutting curves fail") {
    Aabb bounds{{0, 0, 0}, {3.2, 3.2, 3.2}};
    occupancy::OccupancyOctree free_map(bounds, 0.05);
    std::vector<Point3> straight{{0.2, 0.2, 0.2}, {1.0, 0.2, 0.2}, {1.8, 0.2, 0.2}};
    auto line = fit_bezier_chain(straight, 1.0 / 3.0);
    CHECK(smoothing::validate_smooth(line, free_map, 0.05, 0.05));

    // hairpin: place an occupied leaf on the curve but off the polyline
    std::vector<Point3> hairpin{{0.4, 0.4, 0.4}, {1.6, 0.4, 0.4}, {1.6, 1.6, 0.4}};
    auto curve = fit_bezier_chain(hairpin, 1.0 / 3.0);
    Point3 bulge = curve.segments[0].eval(0.85);
    CHECK(distance(bulge, hairpin[1]) > 0.05);  // the curve cuts the corner
    occupancy::OccupancyOctree corner_map(bounds, 0.05);
    corner_map.set_leaf_log_odds(corner_map.leaf_at(bulge), occupancy::kLogOddsMax);
    CHECK(!smoothing::validate_smooth(curve, corner_map, 0.05, 0.05));
    // while the piecewise-linear path itself stays collision free
    bool polyline_free = true;
    for (size_t i = 1; i < hairpin.size(); ++i)
        polyline_free = polyline_free && planner::edge_collision_free(corner_map, hairpin[i - 1],
                                                                      hairpin[i], 0.01, 0.0);
    CHECK(polyline_free);
}

TEST_SUITE_END();

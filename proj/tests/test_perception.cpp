#include <doctest.h>

#include <map>
#include <random>

#include "bplan/perception.hpp"
#include "bplan/scene.hpp"
#include "support/oracles.hpp"

using namespace bplan;
using perception::Frame;
using perception::PointCloud;

TEST_SUITE_BEGIN("perception");

namespace {

PointCloud make_cloud(std::vector<std::array<double, 6>> rows, Frame frame = Frame::Sensor) {
    PointCloud cloud;
    cloud.frame = frame;
    for (const auto& r : rows) cloud.points.push_back({{r[0], r[1], r[2]}, {r[3], r[4], r[5]}});
    return cloud;
}

/// |signed distance| to an axis-aligned box surface.
double box_surface_distance(const Point3& p, const Point3& c, const Vec3& h) {
    double qx = std::abs(p.x - c.x) - h.x;
    double qy = std::abs(p.y - c.y) - h.y;
    double qz = std::abs(p.z - c.z) - h.z;
    double outside = std::sqrt(std::max(qx, 0.0) * std::max(qx, 0.0) +
                               std::max(qy, 0.0) * std::max(qy, 0.0) +
                               std::max(qz, 0.0) * std::max(qz, 0.0));
    double inside = std::min(std::max({qx, qy, qz}), 0.0);
    return std::abs(outside + inside);
}

}  // namespace

TEST_CASE("render: sphere on the optical axis returns ranges within [d-r, d+r]") {
    scene::Scene sc;
    sc.obstacles.push_back({geom::SphereShape{{0, 0, 1.6}, 0.3}, {200, 10, 10}});
    auto pose = look_at({0, -1.4, 1.6}, {0, 0, 1.6});
    auto cloud = perception::render_point_cloud(sc, pose, 0.02);
    REQUIRE(!cloud.points.empty());
    double d = 1.4, r = 0.3;
    for (const auto& cp : cloud.points) {
        double range = cp.position.norm();  // sensor frame: origin at the sensor
        CHECK(range >= d - r - 1e-9);
        CHECK(range <= d + r + 1e-9);
        CHECK(cp.color == Rgb{200, 10, 10});
    }
}

TEST_CASE("render: empty scene gives an empty cloud") {
    scene::Scene sc;
    auto cloud = perception::render_point_cloud(sc, look_at({0, -1, 1}, {0, 0, 1}), 0.05);
    CHECK(cloud.points.empty());
    CHECK(cloud.frame == Frame::Sensor);
}

TEST_CASE("render: every box-scene point lies on the box surface") {
    scene::Scene sc;
    geom::BoxShape box{{0.2, 0.3, 1.2}, {0.3, 0.2, 0.4}, 0.0};
    sc.obstacles.push_back({box, {90, 90, 90}});
    auto pose = look_at({-1.2, -1.2, 2.0}, {0.2, 0.3, 1.2});
    auto cloud = perception::render_point_cloud(sc, pose, 0.02);
    REQUIRE(cloud.points.size() > 50);
    for (const auto& cp : cloud.points) {
        Point3 world = pose.apply(cp.position);
        CHECK(box_surface_distance(world, box.center, box.half) < 1e-9);
    }
}

TEST_CASE("render: occlusion keeps only the first hit") {
    scene::Scene sc;
    sc.obstacles.push_back({geom::SphereShape{{0, 0, 1.0}, 0.2}, {255, 0, 0}});
    sc.obstacles.push_back({geom::SphereShape{{0, 0, 2.0}, 0.2}, {0, 0, 255}});
    auto pose = look_at({0, 0, 0.01}, {0, 0, 1});
    auto cloud = perception::render_point_cloud(sc, pose, 0.05);
    for (const auto& cp : cloud.points)
        if (std::abs(cp.position.x) < 0.05 && std::abs(cp.position.y) < 0.05)
            CHECK(cp.color == Rgb{255, 0, 0});
}

TEST_CASE("transform_cloud: identity, 45-degree tilt, rigidity") {
    auto cloud = make_cloud({{0, 0, 1, 10, 20, 30}, {0.5, -0.2, 2, 1, 2, 3}});
    auto same = perception::transform_cloud(cloud, 0.0, {0, 0, 0});
    CHECK(same.frame == Frame::World);
    CHECK(distance(same.points[0].position, {0, 0, 1}) < 1e-15);

    auto tilted = perception::transform_cloud(cloud, M_PI / 4, {0, 0, 0});
    Point3 expect{0, -std::sin(M_PI / 4), std::cos(M_PI / 4)};
    CHECK(distance(tilted.points[0].position, expect) < 1e-12);
    CHECK(tilted.points[0].color == Rgb{10, 20, 30});

    std::mt19937_64 gen(3);
    auto u = [&] { return 4.0 * static_cast<double>(gen() >> 11) * 0x1.0p-53 - 2.0; };
    PointCloud random_cloud;
    random_cloud.frame = Frame::Sensor;
    for (int i = 0; i < 40; ++i) random_cloud.points.push_back({{u(), u(), u()}, {1, 2, 3}});
    auto moved = perception::transform_cloud(random_cloud, 1.1, {0.3, -0.8, 2.2});
    for (size_t i = 0; i < moved.points.size(); ++i)
        for (size_t j = i + 1; j < moved.points.size(); ++j) {
            double before = distance(random_cloud.points[i].position, random_cloud.points[j].position);
            double after = distance(moved.points[i].position, moved.points[j].position);
            CHECK(std::abs(before - after) < 1e-12);
        }
    CHECK_THROWS_AS(perception::transform_cloud(moved, 0.1, {0, 0, 0}), Error);
}

TEST_CASE("passthrough: identity range, selection, idempotence") {
    auto cloud = make_cloud({{0, 0, 0.1, 0, 0, 0}, {0, 0, 0.5, 0, 0, 0}, {0, 0, 0.9, 0, 0, 0}});
    auto all = perception::passthrough_filter(cloud, 2, -1e30, 1e30);
    CHECK(all.points.size() == 3);
    auto mid = perception::passthrough_filter(cloud, 2, 0.2, 0.8);
    REQUIRE(mid.points.size() == 1);
    CHECK(mid.points[0].position.z == doctest::Approx(0.5));
    auto twice = perception::passthrough_filter(mid, 2, 0.2, 0.8);
    CHECK(twice.points.size() == mid.points.size());
    CHECK_THROWS_AS(perception::passthrough_filter(cloud, 2, 1.0, 0.0), Error);
}

TEST_CASE("voxel_downsample: centroid merging and bin counting") {
    auto two = make_cloud({{0.01, 0, 0, 10, 0, 0}, {0.03, 0, 0, 20, 0, 0}});
    auto merged = perception::voxel_downsample(two, 0.1);
    REQUIRE(merged.points.size() == 1);
    CHECK(distance(merged.points[0].position, {0.02, 0, 0}) < 1e-12);
    CHECK(merged.points[0].color.r == doctest::Approx(15.0));

    // far-apart points survive unchanged
    auto sparse = make_cloud({{0, 0, 0, 1, 1, 1}, {1, 1, 1, 2, 2, 2}, {-2, 0.5, 3, 3, 3, 3}});
    auto kept = perception::voxel_downsample(sparse, 0.1);
    CHECK(kept.points.size() == 3);

    // uniform 10^3 lattice with spacing 0.05 and leaf 0.1 -> exactly 5^3 bins
    PointCloud lattice;
    lattice.frame = Frame::Sensor;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            for (int k = 0; k < 10; ++k)
                lattice.points.push_back({{0.05 * i, 0.05 * j, 0.05 * k}, {0, 0, 0}});
    auto binned = perception::voxel_downsample(lattice, 0.1);
    CHECK(binned.points.size() == 125);
}

TEST_CASE("region growing: two color clusters separate into exactly two regions") {
    PointCloud cloud;
    cloud.frame = Frame::World;
    std::vector<int> truth;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) {
                cloud.points.push_back({{0.05 * i, 0.05 * j, 0.05 * k}, {255, 0, 0}});
                truth.push_back(0);
                cloud.points.push_back({{2.0 + 0.05 * i, 0.05 * j, 0.05 * k}, {0, 0, 255}});
                truth.push_back(1);
            }
    auto regions = perception::region_grow_segment(cloud, 6, 30.0, 20.0);
    REQUIRE(regions.size() == 2);
    for (const auto& region : regions) {
        int cluster = truth[region.indices[0]];
        CHECK(region.indices.size() == 64);
        for (int idx : region.indices) CHECK(truth[idx] == cluster);
    }
}

TEST_CASE("region growing: uniform color gives one region, zero threshold singletons") {
    PointCloud uniform;
    uniform.frame = Frame::World;
    std::mt19937_64 gen(5);
    auto u = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < 60; ++i) uniform.points.push_back({{u(), u(), u()}, {50, 60, 70}});
    auto one = perception::region_grow_segment(uniform, 8, 1000.0, 0.0);
    CHECK(one.size() == 1);
    CHECK(one[0].indices.size() == 60);

    PointCloud distinct;
    distinct.frame = Frame::World;
    for (int i = 0; i < 30; ++i)
        distinct.points.push_back({{u(), u(), u()},
                                   {static_cast<double>(i * 8), static_cast<double>(255 - i * 8),
                                    static_cast<double>(i)}});
    auto singles = perception::region_grow_segment(distinct, 5, 0.0, 0.0);
    CHECK(singles.size() == 30);
    for (const auto& region : singles) CHECK(region.indices.size() == 1);
}

TEST_CASE("region growing output is always a partition") {
    std::mt19937_64 gen(17);
    auto u = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 10; ++trial) {
        PointCloud cloud;
        cloud.frame = Frame::World;
        int n = 20 + static_cast<int>(gen() % 100);
        for (int i = 0; i < n; ++i)
            cloud.points.push_back(
                {{2 * u(), 2 * u(), 2 * u()}, {255 * u(), 255 * u(), 255 * u()}});
        auto regions = perception::region_grow_segment(cloud, 4, 60.0, 30.0);
        std::vector<int> seen(n, 0);
        for (const auto& region : regions) {
            double r = 0, g = 0, b = 0;
            for (int idx : region.indices) {
                ++seen[idx];
                r += cloud.points[idx].color.r;
                g += cloud.points[idx].color.g;
                b += cloud.points[idx].color.b;
            }
            double inv = 1.0 / region.indices.size();
            CHECK(color_distance(region.mean_color, {r * inv, g * inv, b * inv}) < 1e-9);
        }
        for (int s : seen) CHECK(s == 1);
    }
}

TEST_CASE("remove_robot_regions: edge behaviors") {
    auto cloud = make_cloud({{0, 0, 0, 255, 102, 0}, {0.02, 0, 0, 250, 100, 5}}, Frame::World);
    auto regions = perception::region_grow_segment(cloud, 3, 50.0, 50.0);
    auto none = perception::remove_robot_regions(cloud, regions, scene::kRobotOrange, 40.0);
    CHECK(none.points.empty());  // all regions orange
    auto keep = perception::remove_robot_regions(cloud, regions, {0, 0, 255}, 40.0);
    CHECK(keep.points.size() == cloud.points.size());  // nothing near blue
}

TEST_CASE("self-identification on a synthetic robot scene") {
    scene::Scene sc;
    sc.obstacles.push_back({geom::BoxShape{{0.9, 0.4, 0.5}, {0.25, 0.25, 0.5}, 0.3}, {128, 128, 128}});
    sc.obstacles.push_back({geom::SphereShape{{-0.8, 0.5, 0.6}, 0.35}, {60, 60, 200}});
    scene::add_robot_body(sc);
    auto pose = look_at({0, -1.5, 1.2}, {0, 0, 0.6});
    auto tagged = perception::render_point_cloud_tagged(sc, pose, 0.008);
    const auto& cloud = tagged.cloud;
    REQUIRE(cloud.points.size() > 500);

    auto regions = perception::region_grow_segment(cloud, 10, 30.0, 20.0);
    auto filtered = perception::remove_robot_regions(cloud, regions, scene::kRobotOrange, 40.0);

    std::map<std::array<double, 3>, int> tag_of;
    for (size_t i = 0; i < cloud.points.size(); ++i) {
        const auto& p = cloud.points[i].position;
        tag_of[{p.x, p.y, p.z}] = tagged.source[i];
    }
    int robot_total = 0, obstacle_total = 0;
    for (int t : tagged.source) (t < 0 ? robot_total : obstacle_total)++;
    int robot_kept = 0, obstacle_kept = 0;
    for (const auto& cp : filtered.points) {
        int tag = tag_of.at({cp.position.x, cp.position.y, cp.position.z});
        (tag < 0 ? robot_kept : obstacle_kept)++;
    }
    REQUIRE(robot_total > 100);
    REQUIRE(obstacle_total > 100);
    CHECK(static_cast<double>(robot_total - robot_kept) / robot_total >= 0.99);
    CHECK(static_cast<double>(obstacle_kept) / obstacle_total >= 0.99);
}

TEST_CASE("color distance is a metric on RGB triples") {
    std::mt19937_64 gen(29);
    auto c = [&] {
        return Rgb{255 * static_cast<double>(gen() >> 11) * 0x1.0p-53,
                   255 * static_cast<double>(gen() >> 11) * 0x1.0p-53,
                   255 * static_cast<double>(gen() >> 11) * 0x1.0p-53};
    };
    for (int i = 0; i < 500; ++i) {
        Rgb a = c(), b = c(), d = c();
        CHECK(color_distance(a, b) == color_distance(b, a));
        CHECK(color_distance(a, a) == 0.0);
        CHECK(color_distance(a, d) <= color_distance(a, b) + color_distance(b, d) + 1e-12);
    }
}

TEST_CASE("region growing rejects an empty cloud") {
    perception::PointCloud empty;
    CHECK_THROWS_AS(perception::region_grow_segment(empty, 5, 10.0, 10.0), EmptyInputError);
}

TEST_CASE("cloud file round trip") {
    auto cloud = make_cloud({{0.125, -2.5, 3.75, 12, 34, 56}, {1, 2, 3, 0, 0, 255}}, Frame::World);
    auto text = perception::to_text(cloud);
    CHECK(text.rfind("# frame=world count=2", 0) == 0);
    auto back = perception::from_text(text);
    REQUIRE(back.points.size() == 2);
    CHECK(back.frame == Frame::World);
    CHECK(distance(back.points[0].position, cloud.points[0].position) < 1e-9);
    CHECK(back.points[1].color == Rgb{0, 0, 255});
    CHECK_THROWS_AS(perception::from_text("garbage"), CorruptFileError);
}

TEST_SUITE_END();

#include <doctest.h>

#include <random>
#include <set>

#include "bplan/occupancy.hpp"
#include "support/oracles.hpp"

using namespace bplan;
using occupancy::OccupancyOctree;

TEST_SUITE_BEGIN("occupancy");

namespace {

Aabb cube_bounds() { return {{0, 0, 0}, {3.2, 3.2, 3.2}}; }

}  // namespace

TEST_CASE("new_octree: depth, fresh-state queries, resolution limit") {
    OccupancyOctree map(cube_bounds(), 0.05);
    CHECK(map.depth() == 6);  // 3.2 / 0.05 = 64 = 2^6
    CHECK(map.leaf_side() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(!map.collides_sphere({1.0, 1.0, 1.0}, 0.5));
    CHECK(map.clearance({1.0, 1.0, 1.0}) == doctest::Approx(cube_bounds().diagonal()));
    CHECK(!map.leaf_log_odds({3, 3, 3}).has_value());
    CHECK_THROWS_AS(OccupancyOctree(cube_bounds(), 1e-9), ResolutionTooFineError);
}

TEST_CASE("insert_ray: 10-leaf axis-aligned ray marks 9 free and 1 occupied") {
    OccupancyOctree map(cube_bounds(), 0.05);
    Point3 origin{0.026, 0.026, 0.026};
    Point3 hit{0.026 + 9 * 0.05, 0.026, 0.026};
    map.insert_ray(origin, hit);
    for (int i = 0; i < 9; ++i) {
        auto lo = map.leaf_log_odds({i, 0, 0});
        REQUIRE(lo.has_value());
        CHECK(occupancy::probability(*lo) < 0.5);
    }
    auto end = map.leaf_log_odds({9, 0, 0});
    REQUIRE(end.has_value());
    CHECK(occupancy::probability(*end) > 0.5);
    CHECK(!map.leaf_log_odds({10, 0, 0}).has_value());
}

TEST_CASE("insert_ray: repeated hits accumulate and clamp") {
    OccupancyOctree map(cube_bounds(), 0.05);
    Point3 a{0.5, 0.5, 0.5}, b{0.9, 0.5, 0.5};
    map.insert_ray(a, b);
    map.insert_ray(a, b);
    auto lo = map.leaf_log_odds(map.leaf_at(b));
    REQUIRE(lo.has_value());
    CHECK(*lo == doctest::Approx(2 * occupancy::kLogOddsHit));
    for (int i = 0; i < 10; ++i) map.insert_ray(a, b);
    CHECK(*map.leaf_log_odds(map.leaf_at(b)) == doctest::Approx(occupancy::kLogOddsMax));
}

TEST_CASE("insert_ray: zero-length ray touches only the containing leaf") {
    OccupancyOctree map(cube_bounds(), 0.05);
    map.insert_ray({1.0, 1.0, 1.0}, {1.0, 1.0, 1.0});
    int leaves = 0;
    map.for_each_leaf([&](const occupancy::LeafCoord&, float lo) {
        ++leaves;
        CHECK(lo == doctest::Approx(occupancy::kLogOddsHit));
    });
    CHECK(leaves == 1);
    CHECK_THROWS_AS(map.insert_ray({-1, 0, 0}, {1, 1, 1}), OutOfBoundsError);
}

TEST_CASE("ray traversal visits exactly the leaves of the crossing-time oracle") {
    OccupancyOctree proto(cube_bounds(), 0.1);
    std::mt19937_64 gen(41);
    auto u = [&] { return 0.05 + 3.1 * static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 200; ++trial) {
        OccupancyOctree map(cube_bounds(), 0.1);
        Point3 a{u(), u(), u()}, b{u(), u(), u()};
        map.insert_ray(a, b);
        std::set<oracle::Cell> visited;
        map.for_each_leaf([&](const occupancy::LeafCoord& c, float) {
            visited.insert({c.x, c.y, c.z});
        });
        auto expected = oracle::segment_cells(a, b, cube_bounds().min, map.leaf_side(),
                                              static_cast<int>(map.cells_per_side()));
        CHECK(visited == expected);
    }
}

TEST_CASE("build_map: empty scene, surface adherence, determinism") {
    scene::Scene empty;
    empty.bounds = cube_bounds();
    auto map0 = occupancy::build_map(empty, occupancy::default_sensor_poses(empty.bounds), 0.05);
    CHECK(map0.occupied_leaves().empty());

    scene::Scene sc;
    sc.bounds = cube_bounds();
    geom::BoxShape box{{1.6, 1.6, 1.6}, {0.4, 0.3, 0.5}, 0.0};
    sc.obstacles.push_back({box, {100, 100, 100}});
    std::vector<RigidTransform> poses{look_at({0.2, 1.6, 1.6}, box.center),
                                      look_at({3.0, 1.6, 1.6}, box.center)};
    auto map = occupancy::build_map(sc, poses, 0.01);
    auto occupied = map.occupied_leaves();
    REQUIRE(!occupied.empty());
    double leaf_diag = map.leaf_side() * std::sqrt(3.0);
    for (const auto& leaf : occupied) {
        double qx = std::abs(leaf.center.x - box.center.x) - box.half.x;
        double qy = std::abs(leaf.center.y - box.center.y) - box.half.y;
        double qz = std::abs(leaf.center.z - box.center.z) - box.half.z;
        double outside = std::sqrt(std::max(qx, 0.0) * std::max(qx, 0.0) +
                                   std::max(qy, 0.0) * std::max(qy, 0.0) +
                                   std::max(qz, 0.0) * std::max(qz, 0.0));
        double inside = std::min(std::max({qx, qy, qz}), 0.0);
        CHECK(std::abs(outside + inside) <= leaf_diag + 1e-9);
    }
    auto map2 = occupancy::build_map(sc, poses, 0.01);
    CHECK(occupancy::dump_occupied(map2) == occupancy::dump_occupied(map));
}

TEST_CASE("collides_sphere: hand-computed box distance case") {
    OccupancyOctree map(cube_bounds(), 0.05);
    map.set_leaf_log_odds({0, 0, 0}, occupancy::kLogOddsMax);  // cube [0, 0.05]^3
    CHECK(map.collides_sphere({0.1, 0.025, 0.025}, 0.06));     // distance 0.05 <= 0.06
    CHECK(!map.collides_sphere({0.1, 0.025, 0.025}, 0.049));
    CHECK(map.collides_sphere({0.025, 0.025, 0.025}, 0.0));  // center inside
    CHECK_THROWS_AS(map.collides_sphere({-0.1, 0, 0}, 0.1), OutOfBoundsError);
}

TEST_CASE("clearance: matches exhaustive occupied-leaf scan on random maps") {
    std::mt19937_64 gen(4242);
    auto u = [&] { return 3.2 * static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 20; ++trial) {
        OccupancyOctree map(cube_bounds(), 0.1);
        int n_occupied = 1 + static_cast<int>(gen() % 40);
        for (int i = 0; i < n_occupied; ++i)
            map.set_leaf_log_odds(map.leaf_at({u(), u(), u()}), occupancy::kLogOddsMax);
        for (int q = 0; q < 50; ++q) {
            Point3 p{u(), u(), u()};
            CHECK(map.clearance(p) == doctest::Approx(oracle::brute_clearance(map, p)).epsilon(1e-9));
        }
    }
}

TEST_CASE("clearance properties: zero inside, monotone under insertion, collision iff zero") {
    OccupancyOctree map(cube_bounds(), 0.05);
    map.set_leaf_log_odds({10, 10, 10}, occupancy::kLogOddsMax);
    Point3 inside = map.leaf_center({10, 10, 10});
    CHECK(map.clearance(inside) == 0.0);
    CHECK(map.collides_sphere(inside, 0.0));

    std::mt19937_64 gen(9);
    auto u = [&] { return 3.2 * static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    std::vector<Point3> probes;
    for (int i = 0; i < 30; ++i) probes.push_back({u(), u(), u()});
    std::vector<double> before;
    for (const auto& p : probes) before.push_back(map.clearance(p));
    for (int i = 0; i < 15; ++i)
        map.set_leaf_log_odds(map.leaf_at({u(), u(), u()}), occupancy::kLogOddsMax);
    for (size_t i = 0; i < probes.size(); ++i) {
        double after = map.clearance(probes[i]);
        CHECK(after <= before[i] + 1e-12);
        CHECK(map.collides_sphere(probes[i], 0.0) == (after == 0.0));
    }
}

TEST_CASE("descriptor: fresh map is all zero; saturated leaf maps through the sigmoid") {
    OccupancyOctree map(cube_bounds(), 0.05);
    auto zero = occupancy::to_voxel_descriptor(map, cube_bounds().min, {32, 32, 32}, 0.1);
    for (double v : zero.values) CHECK(v == 0.0);

    map.set_leaf_log_odds({0, 0, 0}, occupancy::kLogOddsMax);
    auto grid = occupancy::to_voxel_descriptor(map, cube_bounds().min, {32, 32, 32}, 0.1);
    double expect = 2.0 / (1.0 + std::exp(-static_cast<double>(occupancy::kLogOddsMax))) - 1.0;
    CHECK(grid.at(0, 0, 0) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(grid.at(1, 0, 0) == 0.0);
    CHECK_THROWS_AS(
        occupancy::to_voxel_descriptor(map, {-1, 0, 0}, {32, 32, 32}, 0.1), OutOfBoundsError);
}

TEST_CASE("descriptor values stay in [-1, 1] on randomized maps") {
    std::mt19937_64 gen(77);
    auto u = [&] { return 0.2 + 2.8 * static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 5; ++trial) {
        OccupancyOctree map(cube_bounds(), 0.05);
        for (int i = 0; i < 200; ++i) map.insert_ray({u(), u(), u()}, {u(), u(), u()});
        auto grid = occupancy::to_voxel_descriptor(map, cube_bounds().min, {32, 32, 32}, 0.1);
        for (double v : grid.values) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("descriptor translation consistency: shifted scene shifts cells by one") {
    auto make = [&](double shift) {
        scene::Scene sc;
        sc.bounds = cube_bounds();
        sc.obstacles.push_back(
            {geom::BoxShape{{1.0 + shift, 1.3, 0.9}, {0.3, 0.25, 0.35}, 0.0}, {1, 2, 3}});
        sc.obstacles.push_back({geom::SphereShape{{2.0 + shift, 2.2, 2.0}, 0.3}, {1, 2, 3}});
        return occupancy::voxelize_scene(sc, 0.05);
    };
    auto base = occupancy::to_voxel_descriptor(make(0.0), cube_bounds().min, {16, 16, 16}, 0.1);
    auto moved = occupancy::to_voxel_descriptor(make(0.1), cube_bounds().min, {16, 16, 16}, 0.1);
    // boundary columns excepted: a shape edge exactly on a leaf boundary can
    // quantize differently after the shift, so compare run interiors only
    int compared = 0;
    for (uint32_t k = 0; k < 16; ++k)
        for (uint32_t j = 0; j < 16; ++j)
            for (uint32_t i = 1; i + 1 < 16; ++i) {
                if (base.at(i - 1, j, k) != base.at(i, j, k)) continue;
                if (base.at(i, j, k) != base.at(i + 1, j, k)) continue;
                CHECK(moved.at(i + 1, j, k) == doctest::Approx(base.at(i, j, k)).epsilon(1e-12));
                ++compared;
            }
    CHECK(compared > 100);
}

TEST_CASE("voxelize_scene marks exactly the leaves the shapes overlap") {
    scene::Scene sc;
    sc.bounds = cube_bounds();
    geom::SphereShape sph{{1.6, 1.6, 1.6}, 0.4};
    sc.obstacles.push_back({sph, {9, 9, 9}});
    auto map = occupancy::voxelize_scene(sc, 0.1);
    int checked = 0;
    map.for_each_leaf([&](const occupancy::LeafCoord& c, float lo) {
        Point3 center = map.leaf_center(c);
        CHECK(lo > 0);
        CHECK(oracle::point_cube_distance(sph.center, center, map.leaf_side()) <= sph.radius + 1e-12);
        ++checked;
    });
    CHECK(checked > 0);
    CHECK(map.collides_sphere(sph.center, 0.0));
}

TEST_CASE("voxel grid binary round trip") {
    occupancy::VoxelGrid grid;
    grid.dims = {4, 3, 2};
    grid.origin = {0.5, -1.0, 2.0};
    grid.voxel_side = 0.125;
    grid.values.resize(24);
    for (size_t i = 0; i < grid.values.size(); ++i)
        grid.values[i] = static_cast<double>(static_cast<float>(std::sin(0.37 * i)));
    auto bin = occupancy::to_binary(grid);
    CHECK(bin.substr(0, 4) == "BVG1");
    auto back = occupancy::voxel_grid_from_binary(bin);
    CHECK(back.dims == grid.dims);
    CHECK(back.voxel_side == grid.voxel_side);
    CHECK(back.values == grid.values);
    CHECK_THROWS_AS(occupancy::voxel_grid_from_binary("BAD0"), CorruptFileError);
    CHECK_THROWS_AS(occupancy::voxel_grid_from_binary(bin.substr(0, bin.size() - 3)),
                    CorruptFileError);
}

TEST_SUITE_END();

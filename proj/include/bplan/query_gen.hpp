#pragma once

#include <cstdint>
#include <vector>

#include "bplan/core.hpp"
#include "bplan/error.hpp"
#include "bplan/occupancy.hpp"
#include "bplan/rng.hpp"
#include "bplan/scene.hpp"

namespace bplan::scene {

/// Connected-component labels over the map's leaf grid for a sphere of radius
/// `ee_radius`: label >= 0 identifies a free component, -1 marks blocked
/// cells. 6-connected.
class FreeComponents {
public:
    FreeComponents(const occupancy::OccupancyOctree& map, double ee_radius) {
        n_ = static_cast<int>(map.cells_per_side());
        label_.assign(static_cast<size_t>(n_) * n_ * n_, -1);
        const Aabb& b = map.bounds();
        std::vector<char> free_cell(label_.size(), 0);
        for (int z = 0; z < n_; ++z)
            for (int y = 0; y < n_; ++y)
                for (int x = 0; x < n_; ++x) {
                    Point3 c = map.leaf_center({x, y, z});
                    if (!b.contains(c)) continue;
                    if (!map.collides_sphere(c, ee_radius)) free_cell[index(x, y, z)] = 1;
                }
        int next = 0;
        std::vector<std::array<int, 3>> stack;
        for (int z = 0; z < n_; ++z)
            for (int y = 0; y < n_; ++y)
                for (int x = 0; x < n_; ++x) {
                    size_t i0 = index(x, y, z);
                    if (!free_cell[i0] || label_[i0] >= 0) continue;
                    int comp = next++;
                    label_[i0] = comp;
                    stack.assign(1, {x, y, z});
                    while (!stack.empty()) {
                        auto [cx, cy, cz] = stack.back();
                        stack.pop_back();
                        constexpr int d[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                                 {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
                        for (const auto& dd : d) {
                            int nx = cx + dd[0], ny = cy + dd[1], nz = cz + dd[2];
                            if (nx < 0 || ny < 0 || nz < 0 || nx >= n_ || ny >= n_ || nz >= n_)
                                continue;
                            size_t ni = index(nx, ny, nz);
                            if (free_cell[ni] && label_[ni] < 0) {
                                label_[ni] = comp;
                                stack.push_back({nx, ny, nz});
                            }
                        }
                    }
                }
        components_ = next;
    }

    int label_at(const occupancy::OccupancyOctree& map, const Point3& p) const {
        auto c = map.leaf_at(p);
        return label_[index(c.x, c.y, c.z)];
    }
    int component_count() const { return components_; }

private:
    size_t index(int x, int y, int z) const {
        return static_cast<size_t>(x) + static_cast<size_t>(n_) * (y + static_cast<size_t>(n_) * z);
    }
    int n_ = 0;
    int components_ = 0;
    std::vector<int32_t> label_;
};

/// Draws a planning query: both endpoints collision-free for the end-effector
/// sphere, separated by at least 40% of the bounds diagonal, connected
/// through free space, and with the straight segment blocked by at least one
/// obstacle (so the plan is nontrivial).
inline PlanningQuery sample_query(const Scene& sc, const occupancy::OccupancyOctree& map,
                                  uint64_t seed, double ee_radius = kDefaultEndEffectorRadius) {
    Rng rng(derive_seed(seed, 0x71ull));
    FreeComponents components(map, ee_radius);
    const double min_separation = 0.4 * sc.bounds.diagonal();
    constexpr int kAttemptBudget = 10000;
    for (int attempt = 0; attempt < kAttemptBudget; ++attempt) {
        Point3 start = rng.point_in(sc.bounds);
        Point3 goal = rng.point_in(sc.bounds);
        if (distance(start, goal) < min_separation) continue;
        if (map.collides_sphere(start, ee_radius) || map.collides_sphere(goal, ee_radius)) continue;
        if (!sc.segment_blocked(start, goal)) continue;
        int ls = components.label_at(map, start);
        if (ls < 0 || ls != components.label_at(map, goal)) continue;
        return {start, goal};
    }
    throw GenerationExhaustedError("sample_query: no admissible query after 10000 attempts");
}

}  // namespace bplan::scene

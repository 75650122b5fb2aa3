#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "bplan/core.hpp"
#include "bplan/error.hpp"
#include "bplan/io.hpp"
#include "bplan/perception.hpp"
#include "bplan/scene.hpp"

namespace bplan::occupancy {

// Log-odds sensor model (OctoMap-style defaults).
inline constexpr float kLogOddsHit = 0.85f;
inline constexpr float kLogOddsMiss = -0.4f;
inline constexpr float kLogOddsMin = -2.0f;
inline constexpr float kLogOddsMax = 2.8f;

inline double probability(double log_odds) { return 1.0 / (1.0 + std::exp(-log_odds)); }

struct LeafCoord {
    int32_t x = 0, y = 0, z = 0;
    bool operator==(const LeafCoord& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct LeafInfo {
    LeafCoord coord;
    Point3 center;
    double side;
    float log_odds;
};

/// Probabilistic octree occupancy map. The root cube covers the workspace
/// bounds; leaves exist only where ray updates (or scene voxelization)
/// touched them. Construction is exclusive-writer; all queries are const and
/// safe to run concurrently once the map is built.
class OccupancyOctree {
public:
    OccupancyOctree(const Aabb& bounds, double leaf_resolution) : bounds_(bounds) {
        double side = bounds.max_side();
        if (side <= 0) throw Error("octree bounds must have positive volume");
        if (leaf_resolution <= 0) throw Error("octree resolution must be > 0");
        depth_ = 0;
        while (side / std::exp2(depth_) > leaf_resolution * (1.0 + 1e-12)) {
            ++depth_;
            if (depth_ > 16) throw ResolutionTooFineError("octree depth would exceed 16");
        }
        root_side_ = side;
        leaf_side_ = side / std::exp2(depth_);
        cells_ = 1u << depth_;
    }

    const Aabb& bounds() const { return bounds_; }
    int depth() const { return depth_; }
    double leaf_side() const { return leaf_side_; }
    uint32_t cells_per_side() const { return cells_; }

    LeafCoord leaf_at(const Point3& p) const {
        auto idx = [&](double v, double lo) {
            int i = static_cast<int>(std::floor((v - lo) / leaf_side_));
            return std::clamp(i, 0, static_cast<int>(cells_) - 1);
        };
        return {idx(p.x, bounds_.min.x), idx(p.y, bounds_.min.y), idx(p.z, bounds_.min.z)};
    }

    Point3 leaf_center(const LeafCoord& c) const {
        return {bounds_.min.x + (c.x + 0.5) * leaf_side_, bounds_.min.y + (c.y + 0.5) * leaf_side_,
                bounds_.min.z + (c.z + 0.5) * leaf_side_};
    }

    std::optional<float> leaf_log_odds(const LeafCoord& c) const {
        const Node* n = &root_;
        for (int level = 0; level < depth_; ++level) {
            if (!n->children) return std::nullopt;
            n = &(*n->children)[child_index(c, level)];
        }
        if (!n->updated()) return std::nullopt;
        return n->log_odds;
    }

    bool leaf_occupied(const LeafCoord& c) const {
        auto lo = leaf_log_odds(c);
        return lo && *lo > 0.0f;
    }

    /// Additive log-odds update on one leaf, clamped to [min, max].
    void update_leaf(const LeafCoord& c, float delta) {
        Node* n = &root_;
        for (int level = 0; level < depth_; ++level) {
            if (!n->children) n->children = std::make_unique<std::array<Node, 8>>();
            n = &(*n->children)[child_index(c, level)];
        }
        float lo = n->updated() ? n->log_odds : 0.0f;
        n->log_odds = std::clamp(lo + delta, kLogOddsMin, kLogOddsMax);
        n->flags |= kUpdated;
        if (n->log_odds > 0.0f) mark_occupied_path(c);
    }

    void set_leaf_log_odds(const LeafCoord& c, float value) {
        Node* n = &root_;
        for (int level = 0; level < depth_; ++level) {
            if (!n->children) n->children = std::make_unique<std::array<Node, 8>>();
            n = &(*n->children)[child_index(c, level)];
        }
        n->log_odds = std::clamp(value, kLogOddsMin, kLogOddsMax);
        n->flags |= kUpdated;
        if (n->log_odds > 0.0f) mark_occupied_path(c);
    }

    /// Ray update: every leaf crossed strictly before the hit gets a miss, the
    /// leaf containing the hit gets a hit. 3D DDA (Amanatides-Woo) traversal.
    void insert_ray(const Point3& origin, const Point3& hit) {
        if (!bounds_.contains(origin) || !bounds_.contains(hit))
            throw OutOfBoundsError("insert_ray endpoints must be inside bounds");
        LeafCoord c = leaf_at(origin);
        LeafCoord end = leaf_at(hit);
        if (c == end) {
            update_leaf(end, kLogOddsHit);
            return;
        }
        Vec3 d = hit - origin;
        int step[3];
        double tmax[3], tdelta[3];
        int32_t cur[3] = {c.x, c.y, c.z};
        const int32_t stop[3] = {end.x, end.y, end.z};
        const double olo[3] = {bounds_.min.x, bounds_.min.y, bounds_.min.z};
        const double od[3] = {origin.x, origin.y, origin.z};
        int advances = 0;
        for (int a = 0; a < 3; ++a) {
            double da = d[a];
            if (da > 0) {
                step[a] = 1;
                double boundary = olo[a] + (cur[a] + 1) * leaf_side_;
                tmax[a] = (boundary - od[a]) / da;
                tdelta[a] = leaf_side_ / da;
            } else if (da < 0) {
                step[a] = -1;
                double boundary = olo[a] + cur[a] * leaf_side_;
                tmax[a] = (boundary - od[a]) / da;
                tdelta[a] = -leaf_side_ / da;
            } else {
                step[a] = 0;
                tmax[a] = std::numeric_limits<double>::infinity();
                tdelta[a] = 0;
            }
            advances += std::abs(stop[a] - cur[a]);
        }
        for (int i = 0; i < advances; ++i) {
            update_leaf({cur[0], cur[1], cur[2]}, kLogOddsMiss);
            int axis = 0;
            if (tmax[1] < tmax[axis]) axis = 1;
            if (tmax[2] < tmax[axis]) axis = 2;
            cur[axis] += step[axis];
            tmax[axis] += tdelta[axis];
        }
        update_leaf(end, kLogOddsHit);
    }

    /// True iff any occupied leaf cube is within `radius` of `center`
    /// (exact point-to-box distance). Unknown space counts as free.
    bool collides_sphere(const Point3& center, double radius) const {
        if (!bounds_.contains(center)) throw OutOfBoundsError("collides_sphere center out of bounds");
        return collide_rec(root_, bounds_.min, root_side_, 0, center, radius);
    }

    /// Distance from `point` to the nearest occupied leaf cube; 0 inside one,
    /// bounds diagonal when the map has no occupied leaves.
    double clearance(const Point3& point) const {
        if (!bounds_.contains(point)) throw OutOfBoundsError("clearance point out of bounds");
        struct Entry {
            double dist;
            const Node* node;
            Vec3 cube_min;
            double side;
            int level;
            bool operator>(const Entry& o) const { return dist > o.dist; }
        };
        std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> pq;
        if (root_.flags & kMayContainOccupied)
            pq.push({cube_distance(bounds_.min, root_side_, point), &root_, bounds_.min, root_side_, 0});
        while (!pq.empty()) {
            Entry e = pq.top();
            pq.pop();
            if (e.level == depth_) {
                if (e.node->updated() && e.node->log_odds > 0.0f) return e.dist;
                continue;
            }
            if (!e.node->children) continue;
            double half = e.side / 2;
            for (int i = 0; i < 8; ++i) {
                const Node& child = (*e.node->children)[i];
                if (e.level + 1 == depth_) {
                    if (!child.updated() || child.log_odds <= 0.0f) continue;
                } else if (!(child.flags & kMayContainOccupied)) {
                    continue;
                }
                Vec3 cmin{e.cube_min.x + ((i & 1) ? half : 0), e.cube_min.y + ((i & 2) ? half : 0),
                          e.cube_min.z + ((i & 4) ? half : 0)};
                pq.push({cube_distance(cmin, half, point), &child, cmin, half, e.level + 1});
            }
        }
        return bounds_.diagonal();
    }

    template <typename F>
    void for_each_leaf(F&& fn) const {
        walk_leaves(root_, 0, 0, 0, 0, fn);
    }

    std::vector<LeafInfo> occupied_leaves() const {
        std::vector<LeafInfo> out;
        for_each_leaf([&](const LeafCoord& c, float lo) {
            if (lo > 0.0f) out.push_back({c, leaf_center(c), leaf_side_, lo});
        });
        return out;
    }

    bool has_occupied() const { return (root_.flags & kMayContainOccupied) != 0; }

private:
    static constexpr uint8_t kUpdated = 1;
    static constexpr uint8_t kMayContainOccupied = 2;

    struct Node {
        std::unique_ptr<std::array<Node, 8>> children;
        float log_odds = 0.0f;
        uint8_t flags = 0;
        bool updated() const { return flags & kUpdated; }
    };

    int child_index(const LeafCoord& c, int level) const {
        int bit = depth_ - 1 - level;
        return (((c.z >> bit) & 1) << 2) | (((c.y >> bit) & 1) << 1) | ((c.x >> bit) & 1);
    }

    void mark_occupied_path(const LeafCoord& c) {
        Node* n = &root_;
        n->flags |= kMayContainOccupied;
        for (int level = 0; level < depth_; ++level) {
            n = &(*n->children)[child_index(c, level)];
            n->flags |= kMayContainOccupied;
        }
    }

    static double cube_distance(const Vec3& cube_min, double side, const Point3& p) {
        Aabb box{cube_min, cube_min + Vec3{side, side, side}};
        return box.distance_to(p);
    }

    bool collide_rec(const Node& n, const Vec3& cube_min, double side, int level,
                     const Point3& center, double radius) const {
        if (!(n.flags & kMayContainOccupied)) return false;
        if (cube_distance(cube_min, side, center) > radius) return false;
        if (level == depth_) return n.updated() && n.log_odds > 0.0f;
        if (!n.children) return false;
        double half = side / 2;
        for (int i = 0; i < 8; ++i) {
            Vec3 cmin{cube_min.x + ((i & 1) ? half : 0), cube_min.y + ((i & 2) ? half : 0),
                      cube_min.z + ((i & 4) ? half : 0)};
            if (collide_rec((*n.children)[i], cmin, half, level + 1, center, radius)) return true;
        }
        return false;
    }

    template <typename F>
    void walk_leaves(const Node& n, int level, int32_t x, int32_t y, int32_t z, F& fn) const {
        if (level == depth_) {
            if (n.updated()) fn(LeafCoord{x, y, z}, n.log_odds);
            return;
        }
        if (!n.children) return;
        for (int i = 0; i < 8; ++i) {
            int bit = depth_ - 1 - level;
            walk_leaves((*n.children)[i], level + 1, x | ((i & 1) << bit), y | (((i >> 1) & 1) << bit),
                        z | (((i >> 2) & 1) << bit), fn);
        }
    }

    Aabb bounds_;
    double root_side_ = 0;
    double leaf_side_ = 0;
    int depth_ = 0;
    uint32_t cells_ = 1;
    Node root_;
};

inline OccupancyOctree new_octree(const Aabb& bounds, double leaf_resolution) {
    return OccupancyOctree(bounds, leaf_resolution);
}

inline constexpr double kDefaultLeafResolution = 0.05;
inline constexpr double kDefaultAngularResolution = 0.01;

/// Four elevated corner viewpoints aimed at the workspace center.
inline std::vector<RigidTransform> default_sensor_poses(const Aabb& bounds) {
    double inset = 0.05 * bounds.max_side();
    Point3 c = bounds.center();
    std::vector<RigidTransform> poses;
    for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0}) {
            Point3 eye{sx > 0 ? bounds.max.x - inset : bounds.min.x + inset,
                       sy > 0 ? bounds.max.y - inset : bounds.min.y + inset,
                       bounds.max.z - inset};
            poses.push_back(look_at(eye, c));
        }
    return poses;
}

/// Builds a map by rendering the scene from each pose and inserting the
/// returned points as rays from the sensor origin.
inline OccupancyOctree build_map(const scene::Scene& sc,
                                 const std::vector<RigidTransform>& sensor_poses,
                                 double angular_resolution,
                                 double leaf_resolution = kDefaultLeafResolution) {
    if (sensor_poses.empty()) throw Error("build_map needs at least one sensor pose");
    OccupancyOctree map(sc.bounds, leaf_resolution);
    for (const auto& pose : sensor_poses) {
        auto cloud = perception::render_point_cloud(sc, pose, angular_resolution);
        for (const auto& cp : cloud.points) {
            Point3 world = pose.apply(cp.position);
            if (!sc.bounds.contains(world) || !sc.bounds.contains(pose.translation)) continue;
            map.insert_ray(pose.translation, world);
        }
    }
    return map;
}

/// Analytic voxelization: marks every leaf whose cube intersects an obstacle
/// as fully occupied. Used by the planning pipelines, where ray-built maps
/// would leave occluded obstacle interiors unknown. The robot body is not
/// voxelized (the pipeline segments it out before mapping).
inline OccupancyOctree voxelize_scene(const scene::Scene& sc,
                                      double leaf_resolution = kDefaultLeafResolution) {
    OccupancyOctree map(sc.bounds, leaf_resolution);
    const double leaf = map.leaf_side();
    const int n = static_cast<int>(map.cells_per_side());
    for (const auto& obstacle : sc.obstacles) {
        Aabb bb = scene::bounding_box(obstacle);
        auto lo_idx = [&](double v, double lo) {
            return std::clamp(static_cast<int>(std::floor((v - lo) / leaf)), 0, n - 1);
        };
        int x0 = lo_idx(bb.min.x, sc.bounds.min.x), x1 = lo_idx(bb.max.x, sc.bounds.min.x);
        int y0 = lo_idx(bb.min.y, sc.bounds.min.y), y1 = lo_idx(bb.max.y, sc.bounds.min.y);
        int z0 = lo_idx(bb.min.z, sc.bounds.min.z), z1 = lo_idx(bb.max.z, sc.bounds.min.z);
        for (int z = z0; z <= z1; ++z)
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    Vec3 cmin{sc.bounds.min.x + x * leaf, sc.bounds.min.y + y * leaf,
                              sc.bounds.min.z + z * leaf};
                    Vec3 cmax = cmin + Vec3{leaf, leaf, leaf};
                    if (scene::overlaps_aabb(obstacle, cmin, cmax))
                        map.set_leaf_log_odds({x, y, z}, kLogOddsMax);
                }
    }
    return map;
}

// --- Voxel descriptor ----------------------------------------------------------

/// Dense descriptor grid; values live in [-1, 1], x-fastest layout.
struct VoxelGrid {
    std::array<uint32_t, 3> dims{32, 32, 32};
    Point3 origin;
    double voxel_side = 0.1;
    std::vector<double> values;

    size_t index(uint32_t i, uint32_t j, uint32_t k) const {
        return i + static_cast<size_t>(dims[0]) * (j + static_cast<size_t>(dims[1]) * k);
    }
    double at(uint32_t i, uint32_t j, uint32_t k) const { return values[index(i, j, k)]; }
    double& at(uint32_t i, uint32_t j, uint32_t k) { return values[index(i, j, k)]; }
    size_t size() const { return values.size(); }
};

/// Descriptor extraction: each grid voxel takes 2*p - 1 where p is the max
/// occupancy probability over the map leaves it covers; voxels with no
/// updated leaf stay 0 (unknown).
inline VoxelGrid to_voxel_descriptor(const OccupancyOctree& map, const Point3& grid_origin,
                                     const std::array<uint32_t, 3>& dims, double voxel_side) {
    VoxelGrid grid;
    grid.dims = dims;
    grid.origin = grid_origin;
    grid.voxel_side = voxel_side;
    Vec3 gmax{grid_origin.x + dims[0] * voxel_side, grid_origin.y + dims[1] * voxel_side,
              grid_origin.z + dims[2] * voxel_side};
    const double pad = 1e-9;
    if (grid_origin.x < map.bounds().min.x - pad || grid_origin.y < map.bounds().min.y - pad ||
        grid_origin.z < map.bounds().min.z - pad || gmax.x > map.bounds().max.x + pad ||
        gmax.y > map.bounds().max.y + pad || gmax.z > map.bounds().max.z + pad)
        throw OutOfBoundsError("descriptor volume must lie within map bounds");
    grid.values.assign(static_cast<size_t>(dims[0]) * dims[1] * dims[2], 0.0);
    const double leaf = map.leaf_side();
    const int n = static_cast<int>(map.cells_per_side());
    const Vec3 mlo = map.bounds().min;
    for (uint32_t k = 0; k < dims[2]; ++k)
        for (uint32_t j = 0; j < dims[1]; ++j)
            for (uint32_t i = 0; i < dims[0]; ++i) {
                Vec3 vlo{grid_origin.x + i * voxel_side, grid_origin.y + j * voxel_side,
                         grid_origin.z + k * voxel_side};
                auto first = [&](double v, double lo) {
                    return std::clamp(static_cast<int>(std::floor((v - lo) / leaf + pad)), 0, n - 1);
                };
                auto last = [&](double v, double lo) {
                    return std::clamp(static_cast<int>(std::ceil((v - lo) / leaf - pad)) - 1, 0,
                                      n - 1);
                };
                int x0 = first(vlo.x, mlo.x), x1 = last(vlo.x + voxel_side, mlo.x);
                int y0 = first(vlo.y, mlo.y), y1 = last(vlo.y + voxel_side, mlo.y);
                int z0 = first(vlo.z, mlo.z), z1 = last(vlo.z + voxel_side, mlo.z);
                float max_lo = -std::numeric_limits<float>::infinity();
                bool any = false;
                for (int z = z0; z <= z1; ++z)
                    for (int y = y0; y <= y1; ++y)
                        for (int x = x0; x <= x1; ++x) {
                            auto lo = map.leaf_log_odds({x, y, z});
                            if (lo) {
                                any = true;
                                max_lo = std::max(max_lo, *lo);
                            }
                        }
                if (any) grid.at(i, j, k) = 2.0 * probability(max_lo) - 1.0;
            }
    return grid;
}

// --- Serialization ---------------------------------------------------------------

/// Debug dump: one occupied leaf per line `cx cy cz side logodds`.
inline std::string dump_occupied(const OccupancyOctree& map) {
    std::string out;
    for (const auto& leaf : map.occupied_leaves()) {
        out += io::fmt_real(leaf.center.x);
        out += ' ';
        out += io::fmt_real(leaf.center.y);
        out += ' ';
        out += io::fmt_real(leaf.center.z);
        out += ' ';
        out += io::fmt_real(leaf.side);
        out += ' ';
        out += io::fmt_real(leaf.log_odds);
        out += '\n';
    }
    return out;
}

inline std::string to_binary(const VoxelGrid& grid) {
    io::BinaryWriter w;
    w.write_bytes("BVG1", 4);
    for (uint32_t d : grid.dims) w.write(d);
    w.write(grid.origin.x);
    w.write(grid.origin.y);
    w.write(grid.origin.z);
    w.write(grid.voxel_side);
    for (double v : grid.values) w.write(static_cast<float>(v));
    return w.take();
}

inline VoxelGrid voxel_grid_from_binary(const std::string& data) {
    io::BinaryReader r(data);
    r.expect_magic("BVG1");
    VoxelGrid grid;
    for (auto& d : grid.dims) d = r.read<uint32_t>();
    grid.origin.x = r.read<double>();
    grid.origin.y = r.read<double>();
    grid.origin.z = r.read<double>();
    grid.voxel_side = r.read<double>();
    size_t n = static_cast<size_t>(grid.dims[0]) * grid.dims[1] * grid.dims[2];
    grid.values.resize(n);
    for (size_t i = 0; i < n; ++i) grid.values[i] = r.read<float>();
    return grid;
}

}  // namespace bplan::occupancy

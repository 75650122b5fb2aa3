#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bplan/core.hpp"
#include "bplan/error.hpp"
#include "bplan/grid_index.hpp"
#include "bplan/io.hpp"
#include "bplan/occupancy.hpp"
#include "bplan/rng.hpp"
#include "bplan/scene.hpp"

namespace bplan::planner {

struct PlannerConfig {
    double step = 0.15;              // fixed extension step d
    int k_nearest = 3;               // parent candidates per insertion
    double p_goal = 0.1;             // goal-bias probability
    double p_bottleneck = 0.0;       // bottleneck-target probability
    double goal_tolerance = 0.1;
    int max_iterations = 100000;
    double edge_check_step = 0.05;   // collision sampling spacing along edges
    double ee_radius = 0.05;         // end-effector sphere radius
    uint64_t seed = 1;
};

/// 10% goal-biased baseline expansion.
inline PlannerConfig baseline_config(uint64_t seed = 1) {
    PlannerConfig cfg;
    cfg.p_goal = 0.1;
    cfg.p_bottleneck = 0.0;
    cfg.seed = seed;
    return cfg;
}

/// Bottleneck-guided expansion: goal 0.2, bottleneck 0.4, random 0.4.
inline PlannerConfig bottleneck_config(uint64_t seed = 1) {
    PlannerConfig cfg;
    cfg.p_goal = 0.2;
    cfg.p_bottleneck = 0.4;
    cfg.seed = seed;
    return cfg;
}

/// Search tree: vertices, parent links and costs-to-come, with a grid index
/// for exact k-nearest queries.
class PlanTree {
public:
    PlanTree(const Point3& root, const Aabb& bounds)
        : index_(bounds, bounds.max_side() / 8.0) {
        vertices_.push_back(root);
        parent_.push_back(-1);
        cost_.push_back(0.0);
        children_.emplace_back();
        index_.insert(root, 0);
    }

    int size() const { return static_cast<int>(vertices_.size()); }
    const Point3& vertex(int i) const { return vertices_[i]; }
    int parent(int i) const { return parent_[i]; }
    double cost(int i) const { return cost_[i]; }
    const std::vector<int>& children(int i) const { return children_[i]; }

    int add_vertex(const Point3& p, int parent) {
        int id = size();
        vertices_.push_back(p);
        parent_.push_back(parent);
        cost_.push_back(cost_[parent] + distance(vertices_[parent], p));
        children_.emplace_back();
        children_[parent].push_back(id);
        index_.insert(p, id);
        return id;
    }

    /// Moves `v` under `new_parent` and shifts the whole subtree's costs.
    void reparent(int v, int new_parent) {
        int old = parent_[v];
        auto& sib = children_[old];
        sib.erase(std::find(sib.begin(), sib.end(), v));
        parent_[v] = new_parent;
        children_[new_parent].push_back(v);
        double delta = cost_[new_parent] + distance(vertices_[new_parent], vertices_[v]) - cost_[v];
        scratch_.clear();
        scratch_.push_back(v);
        while (!scratch_.empty()) {
            int u = scratch_.back();
            scratch_.pop_back();
            cost_[u] += delta;
            for (int c : children_[u]) scratch_.push_back(c);
        }
    }

    /// The min(k, size) vertices closest to x, ascending distance, ties by
    /// lower index.
    std::vector<int> nearest_k(const Point3& x, int k) const {
        std::vector<int> out;
        index_.knn(x, k, out);
        return out;
    }

private:
    std::vector<Point3> vertices_;
    std::vector<int> parent_;
    std::vector<double> cost_;
    std::vector<std::vector<int>> children_;
    GridIndex3 index_;
    mutable std::vector<int> scratch_;
};

struct PlanResult {
    std::vector<Point3> path;  // start .. vertex within goal tolerance
    int tree_size = 0;
    int iterations = 0;
    double wall_time = 0.0;  // seconds
    bool success = false;
};

inline double path_length(const std::vector<Point3>& path) {
    double len = 0;
    for (size_t i = 1; i < path.size(); ++i) len += distance(path[i - 1], path[i]);
    return len;
}

/// Three-way expansion draw: goal with p_goal, a bottleneck point with
/// p_bottleneck (mass folded into random when no bottlenecks exist), else a
/// uniform workspace sample.
inline Point3 choose_target(const PlannerConfig& cfg, const Aabb& bounds, const Point3& goal,
                            const std::vector<Point3>& bottlenecks, Rng& rng) {
    double u = rng.uniform01();
    if (u < cfg.p_goal) return goal;
    double pb = bottlenecks.empty() ? 0.0 : cfg.p_bottleneck;
    if (u < cfg.p_goal + pb)
        return bottlenecks[rng.uniform_index(bottlenecks.size())];
    return rng.point_in(bounds);
}

/// Fixed-step extension toward a target.
inline Point3 steer(const Point3& from, const Point3& toward, double step) {
    Vec3 d = toward - from;
    double len = d.norm();
    if (len <= step) return toward;
    return from + d * (step / len);
}

/// True iff every sample along [a, b] at spacing <= delta (endpoints
/// included) is collision-free for the end-effector sphere.
inline bool edge_collision_free(const occupancy::OccupancyOctree& map, const Point3& a,
                                const Point3& b, double delta, double ee_radius) {
    double len = distance(a, b);
    int n = std::max(1, static_cast<int>(std::ceil(len / delta)));
    for (int i = 0; i <= n; ++i) {
        double t = static_cast<double>(i) / n;
        if (map.collides_sphere(a + (b - a) * t, ee_radius)) return false;
    }
    return true;
}

/// Attaches x_new to the cost-minimizing collision-free neighbor, then
/// rewires neighbors through x_new when that lowers their cost-to-come.
/// Returns the new vertex index, or nullopt when no neighbor edge is
/// collision-free (vertex discarded).
inline std::optional<int> choose_parent_and_rewire(PlanTree& tree, const Point3& x_new,
                                                   const std::vector<int>& neighbors,
                                                   const occupancy::OccupancyOctree& map,
                                                   const PlannerConfig& cfg) {
    if (neighbors.empty()) return std::nullopt;
    std::vector<std::pair<double, int>> candidates;
    candidates.reserve(neighbors.size());
    for (int nb : neighbors)
        candidates.push_back({tree.cost(nb) + distance(tree.vertex(nb), x_new), nb});
    std::sort(candidates.begin(), candidates.end());
    int parent = -1;
    for (const auto& [c, nb] : candidates) {
        if (edge_collision_free(map, tree.vertex(nb), x_new, cfg.edge_check_step, cfg.ee_radius)) {
            parent = nb;
            break;
        }
    }
    if (parent < 0) return std::nullopt;
    int v = tree.add_vertex(x_new, parent);
    for (int nb : neighbors) {
        if (nb == parent) continue;
        double through = tree.cost(v) + distance(x_new, tree.vertex(nb));
        if (through < tree.cost(nb) &&
            edge_collision_free(map, x_new, tree.vertex(nb), cfg.edge_check_step, cfg.ee_radius))
            tree.reparent(nb, v);
    }
    return v;
}

/// Called after each accepted insertion with the tree and the new vertex id.
using PlanObserver = std::function<void(const PlanTree&, int)>;

/// RRT* to first feasible path. Deterministic given (map, query, bottlenecks,
/// config) up to the reported wall time.
inline PlanResult plan(const occupancy::OccupancyOctree& map, const scene::PlanningQuery& query,
                       const std::vector<Point3>& bottlenecks, const PlannerConfig& cfg,
                       const PlanObserver& observer = {}) {
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    if (map.collides_sphere(query.start, cfg.ee_radius))
        throw StartInCollisionError("planning start is in collision");
    Rng rng(cfg.seed);
    PlanTree tree(query.start, map.bounds());
    // bottleneck points already absorbed into the tree stop being targets;
    // their draw mass reverts to uniform exploration
    std::vector<Point3> live_bottlenecks = bottlenecks;
    PlanResult result;
    if (distance(query.start, query.goal) <= cfg.goal_tolerance) {
        result.success = true;
        result.path = {query.start};
        result.tree_size = 1;
        result.wall_time = elapsed();
        return result;
    }
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        Point3 target = choose_target(cfg, map.bounds(), query.goal, live_bottlenecks, rng);
        // parent selection precedes the extension: grow from the candidate
        // that reaches the target cheapest, not the merely nearest vertex
        int x_min = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int nb : tree.nearest_k(target, cfg.k_nearest)) {
            double c = tree.cost(nb) + distance(tree.vertex(nb), target);
            if (c < best) {
                best = c;
                x_min = nb;
            }
        }
        Point3 x_new = steer(tree.vertex(x_min), target, cfg.step);
        if (squared_distance(x_new, tree.vertex(x_min)) < 1e-18) continue;  // already reached
        if (map.collides_sphere(x_new, cfg.ee_radius)) continue;
        auto v = choose_parent_and_rewire(tree, x_new, tree.nearest_k(x_new, cfg.k_nearest), map, cfg);
        if (!v) continue;
        std::erase_if(live_bottlenecks,
                      [&](const Point3& b) { return squared_distance(x_new, b) < 1e-18; });
        if (observer) observer(tree, *v);
        if (distance(x_new, query.goal) <= cfg.goal_tolerance) {
            result.success = true;
            result.tree_size = tree.size();
            result.iterations = it;
            for (int u = *v; u >= 0; u = tree.parent(u)) result.path.push_back(tree.vertex(u));
            std::reverse(result.path.begin(), result.path.end());
            break;
        }
    }
    if (!result.success) {
        result.tree_size = tree.size();
        result.iterations = cfg.max_iterations;
    }
    result.wall_time = elapsed();
    return result;
}

// --- Result serialization -------------------------------------------------------

inline std::string to_text(const PlanResult& r) {
    std::string out;
    out += "success " + std::to_string(r.success ? 1 : 0) + "\n";
    out += "tree_size " + std::to_string(r.tree_size) + "\n";
    out += "iterations " + std::to_string(r.iterations) + "\n";
    out += "wall_time_s " + io::fmt_real(r.wall_time) + "\n";
    for (const auto& p : r.path) {
        out += io::fmt_real(p.x);
        out += ' ';
        out += io::fmt_real(p.y);
        out += ' ';
        out += io::fmt_real(p.z);
        out += '\n';
    }
    return out;
}

inline PlanResult from_text(const std::string& text) {
    PlanResult r;
    const char* p = text.data();
    const char* end = p + text.size();
    auto read_kv = [&](const char* key) {
        size_t klen = std::strlen(key);
        if (static_cast<size_t>(end - p) < klen || std::strncmp(p, key, klen) != 0)
            throw CorruptFileError(std::string("plan result: expected ") + key);
        p += klen;
        char* next = nullptr;
        double v = std::strtod(p, &next);
        p = next;
        while (p < end && (*p == '\n' || *p == ' ')) ++p;
        return v;
    };
    r.success = read_kv("success ") != 0;
    r.tree_size = static_cast<int>(read_kv("tree_size "));
    r.iterations = static_cast<int>(read_kv("iterations "));
    r.wall_time = read_kv("wall_time_s ");
    while (p < end) {
        char* next = nullptr;
        Point3 pt;
        pt.x = std::strtod(p, &next);
        if (next == p) break;
        p = next;
        pt.y = std::strtod(p, &next);
        p = next;
        pt.z = std::strtod(p, &next);
        p = next;
        r.path.push_back(pt);
    }
    return r;
}

}  // namespace bplan::planner

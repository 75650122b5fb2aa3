#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bplan/core.hpp"
#include "bplan/error.hpp"
#include "bplan/io.hpp"
#include "bplan/occupancy.hpp"
#include "bplan/planner.hpp"
#include "bplan/query_gen.hpp"
#include "bplan/rng.hpp"
#include "bplan/scene.hpp"

namespace bplan::labeling {

/// Affine map of each axis onto [-1, 1].
inline std::array<double, 3> normalize(const Point3& p, const Aabb& bounds) {
    if (!bounds.contains(p)) throw OutOfBoundsError("normalize: point outside bounds");
    auto norm1 = [](double v, double lo, double hi) { return 2.0 * (v - lo) / (hi - lo) - 1.0; };
    return {norm1(p.x, bounds.min.x, bounds.max.x), norm1(p.y, bounds.min.y, bounds.max.y),
            norm1(p.z, bounds.min.z, bounds.max.z)};
}

inline Point3 denormalize(const std::array<double, 3>& n, const Aabb& bounds) {
    auto denorm1 = [](double v, double lo, double hi) { return lo + (v + 1.0) * 0.5 * (hi - lo); };
    return {denorm1(n[0], bounds.min.x, bounds.max.x), denorm1(n[1], bounds.min.y, bounds.max.y),
            denorm1(n[2], bounds.min.z, bounds.max.z)};
}

/// The three interior waypoints with the lowest obstacle clearance, ascending
/// clearance, ties by path order; padded by repeating the lowest-clearance
/// waypoint when fewer than three interior waypoints exist. A two-waypoint
/// path falls back to its endpoints as candidates.
inline std::array<Point3, 3> select_bottleneck_labels(const std::vector<Point3>& path,
                                                      const occupancy::OccupancyOctree& map) {
    if (path.size() < 2) throw TooFewWaypointsError("select_bottleneck_labels: need >= 2 waypoints");
    std::vector<Point3> candidates;
    if (path.size() == 2) {
        candidates = path;
    } else {
        candidates.assign(path.begin() + 1, path.end() - 1);
    }
    std::vector<std::pair<double, size_t>> ranked;
    ranked.reserve(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i)
        ranked.push_back({map.clearance(candidates[i]), i});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::array<Point3, 3> out;
    for (int i = 0; i < 3; ++i)
        out[i] = candidates[ranked[std::min<size_t>(i, ranked.size() - 1)].second];
    return out;
}

/// Minimality check used by the dataset re-verification pass: every label is
/// an interior waypoint and no unselected interior waypoint has strictly
/// smaller clearance than the largest selected one.
inline bool verify_labels(const std::vector<Point3>& path, const occupancy::OccupancyOctree& map,
                          const std::array<Point3, 3>& labels, double tol = 1e-9) {
    if (path.size() < 3) return true;  // degenerate: nothing to compare against
    std::vector<Point3> interior(path.begin() + 1, path.end() - 1);
    double max_selected = 0;
    for (const auto& label : labels) {
        bool found = false;
        double c = map.clearance(label);
        for (const auto& wp : interior)
            if (distance(wp, label) <= tol) found = true;
        if (!found) return false;
        max_selected = std::max(max_selected, c);
    }
    for (const auto& wp : interior) {
        bool selected = false;
        for (const auto& label : labels)
            if (distance(wp, label) <= tol) selected = true;
        if (!selected && map.clearance(wp) < max_selected - tol) return false;
    }
    return true;
}

struct DatasetSample {
    occupancy::VoxelGrid grid;
    std::array<double, 6> endpoints;  // normalized start xyz, goal xyz
    std::array<double, 9> labels;     // normalized bottleneck points
    uint8_t split = 0;                // 0 train, 1 test
};

struct Dataset {
    std::vector<DatasetSample> samples;
    std::array<uint32_t, 3> grid_dims{32, 32, 32};
    double voxel_side = 0.1;

    std::vector<int> train_indices() const {
        std::vector<int> out;
        for (size_t i = 0; i < samples.size(); ++i)
            if (samples[i].split == 0) out.push_back(static_cast<int>(i));
        return out;
    }
    std::vector<int> test_indices() const {
        std::vector<int> out;
        for (size_t i = 0; i < samples.size(); ++i)
            if (samples[i].split == 1) out.push_back(static_cast<int>(i));
        return out;
    }
};

struct DatasetConfig {
    int n_problems = 200;
    std::array<double, 3> family_weights{1.0, 1.0, 1.0};  // elongated, narrow_circular, cluttered
    planner::PlannerConfig planner;                        // baseline expansion is forced
    std::array<uint32_t, 3> grid_dims{32, 32, 32};
    double leaf_resolution = occupancy::kDefaultLeafResolution;
    /// 0: a fresh scene per problem. K > 0: problems cycle through K scene
    /// streams, so several queries share each layout (test queries stay
    /// unseen while their scenes recur in training).
    int scene_pool = 0;
    uint64_t seed = 1;
};

/// Laptop-scale preset: 50 problems over a 5-scene pool of the two
/// geometry-determined families, 16^3 descriptors.
inline DatasetConfig desk_dataset_config(uint64_t seed = 1) {
    DatasetConfig cfg;
    cfg.n_problems = 50;
    cfg.grid_dims = {16, 16, 16};
    cfg.scene_pool = 5;
    cfg.family_weights = {1.0, 1.0, 0.0};
    cfg.seed = seed;
    return cfg;
}

/// Invoked per generated sample with the source path and map, before the
/// sample is appended; lets callers re-verify labels without retaining maps.
using SampleSink = std::function<void(const DatasetSample&, const std::vector<Point3>&,
                                      const occupancy::OccupancyOctree&)>;

struct ProblemLog {
    int regenerated = 0;  // planning failures that forced a fresh seed
};

/// Supervised dataset builder: per problem, generate scene + map + query,
/// solve with the 10% goal-biased baseline, label the three lowest-clearance
/// interior waypoints, normalize, append. Every 10th sample goes to the test
/// split. Deterministic per config.
inline Dataset build_dataset(const DatasetConfig& cfg, const SampleSink& sink = {},
                             ProblemLog* log = nullptr) {
    if (cfg.n_problems < 10) throw Error("build_dataset needs n_problems >= 10");
    Dataset ds;
    ds.grid_dims = cfg.grid_dims;
    ds.voxel_side = default_bounds().max_side() / cfg.grid_dims[0];
    int attempts_total = 0, failures_total = 0;
    for (int i = 0; i < cfg.n_problems; ++i) {
        for (uint64_t attempt = 0;; ++attempt) {
            ++attempts_total;
            if (failures_total * 2 > attempts_total && attempts_total >= 20)
                throw GenerationExhaustedError("build_dataset: planning failure rate above 50%");
            uint64_t problem_seed = derive_seed(cfg.seed, static_cast<uint64_t>(i), attempt, 0xD5);
            double wsum = cfg.family_weights[0] + cfg.family_weights[1] + cfg.family_weights[2];
            uint64_t scene_stream;
            scene::Family family;
            if (cfg.scene_pool > 0) {
                // pooled mode: proportional family assignment over the pool
                int k = i % cfg.scene_pool;
                scene_stream = derive_seed(cfg.seed, static_cast<uint64_t>(k), 0, 0x5C);
                double frac = (k + 0.5) / cfg.scene_pool * wsum;
                family = scene::Family::Elongated;
                if (frac >= cfg.family_weights[0]) family = scene::Family::NarrowCircular;
                if (frac >= cfg.family_weights[0] + cfg.family_weights[1])
                    family = scene::Family::Cluttered;
            } else {
                scene_stream = derive_seed(problem_seed, 1);
                Rng pick(derive_seed(scene_stream, 0));
                double u = pick.uniform01() * wsum;
                family = scene::Family::Elongated;
                if (u >= cfg.family_weights[0]) family = scene::Family::NarrowCircular;
                if (u >= cfg.family_weights[0] + cfg.family_weights[1])
                    family = scene::Family::Cluttered;
            }
            scene::Scene sc = scene::make_scene(family, derive_seed(scene_stream, 1));
            occupancy::OccupancyOctree map = occupancy::voxelize_scene(sc, cfg.leaf_resolution);
            scene::PlanningQuery query;
            try {
                query = scene::sample_query(sc, map, derive_seed(problem_seed, 2),
                                            cfg.planner.ee_radius);
            } catch (const GenerationExhaustedError&) {
                ++failures_total;
                if (log) ++log->regenerated;
                continue;
            }
            planner::PlannerConfig pcfg = cfg.planner;
            pcfg.p_goal = 0.1;
            pcfg.p_bottleneck = 0.0;
            pcfg.seed = derive_seed(problem_seed, 3);
            planner::PlanResult res = planner::plan(map, query, {}, pcfg);
            if (!res.success) {
                ++failures_total;
                if (log) ++log->regenerated;
                continue;
            }
            auto label_points = select_bottleneck_labels(res.path, map);
            DatasetSample sample;
            double side = sc.bounds.max_side() / cfg.grid_dims[0];
            sample.grid = occupancy::to_voxel_descriptor(map, sc.bounds.min, cfg.grid_dims, side);
            auto ns = normalize(query.start, sc.bounds);
            auto ng = normalize(query.goal, sc.bounds);
            for (int a = 0; a < 3; ++a) {
                sample.endpoints[a] = ns[a];
                sample.endpoints[3 + a] = ng[a];
            }
            for (int l = 0; l < 3; ++l) {
                auto nl = normalize(label_points[l], sc.bounds);
                for (int a = 0; a < 3; ++a) sample.labels[3 * l + a] = nl[a];
            }
            sample.split = (i % 10 == 9) ? 1 : 0;
            if (sink) sink(sample, res.path, map);
            ds.samples.push_back(std::move(sample));
            break;
        }
    }
    return ds;
}

// --- Dataset file (BNK1) --------------------------------------------------------

inline std::string to_binary(const Dataset& ds) {
    io::BinaryWriter w;
    w.write_bytes("BNK1", 4);
    w.write(static_cast<uint32_t>(ds.samples.size()));
    for (uint32_t d : ds.grid_dims) w.write(d);
    w.write(ds.voxel_side);
    for (const auto& s : ds.samples) {
        for (double v : s.grid.values) w.write(static_cast<float>(v));
        for (double v : s.endpoints) w.write(static_cast<float>(v));
        for (double v : s.labels) w.write(static_cast<float>(v));
        w.write(s.split);
    }
    return w.take();
}

inline Dataset from_binary(const std::string& data) {
    io::BinaryReader r(data);
    r.expect_magic("BNK1");
    Dataset ds;
    uint32_t count = r.read<uint32_t>();
    for (auto& d : ds.grid_dims) d = r.read<uint32_t>();
    ds.voxel_side = r.read<double>();
    size_t cells = static_cast<size_t>(ds.grid_dims[0]) * ds.grid_dims[1] * ds.grid_dims[2];
    ds.samples.resize(count);
    for (auto& s : ds.samples) {
        s.grid.dims = ds.grid_dims;
        s.grid.origin = default_bounds().min;
        s.grid.voxel_side = ds.voxel_side;
        s.grid.values.resize(cells);
        for (size_t i = 0; i < cells; ++i) s.grid.values[i] = r.read<float>();
        for (auto& v : s.endpoints) v = r.read<float>();
        for (auto& v : s.labels) v = r.read<float>();
        s.split = r.read<uint8_t>();
    }
    return ds;
}

inline void save(const Dataset& ds, const std::string& path) {
    io::write_file(path, to_binary(ds));
}
inline Dataset load(const std::string& path) { return from_binary(io::read_file(path)); }

}  // namespace bplan::labeling

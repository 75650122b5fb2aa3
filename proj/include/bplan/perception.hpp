#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "bplan/core.hpp"
#include "bplan/error.hpp"
#include "bplan/grid_index.hpp"
#include "bplan/io.hpp"
#include "bplan/scene.hpp"

namespace bplan::perception {

enum class Frame { Sensor, World };

struct ColoredPoint {
    Point3 position;
    Rgb color;
};

struct PointCloud {
    std::vector<ColoredPoint> points;
    Frame frame = Frame::Sensor;
};

/// A segment of the cloud produced by region growing.
struct Region {
    std::vector<int> indices;  // ascending
    Rgb mean_color;
};

// Simulated depth+color sensor field of view.
inline constexpr double kFovAzimuth = 100.0 * M_PI / 180.0;
inline constexpr double kFovElevation = 80.0 * M_PI / 180.0;

/// Provenance of a rendered point: obstacle index, or -1 for the robot body.
struct TaggedCloud {
    PointCloud cloud;
    std::vector<int> source;
};

/// Casts a pinhole-style angular grid of rays from `pose` and keeps the first
/// analytic hit per ray. Points come back in the sensor frame (+z optical
/// axis, +x right, +y up), colored by the surface they hit.
inline TaggedCloud render_point_cloud_tagged(const scene::Scene& sc, const RigidTransform& pose,
                                             double angular_resolution) {
    TaggedCloud out;
    out.cloud.frame = Frame::Sensor;
    int n_az = static_cast<int>(std::floor(kFovAzimuth / angular_resolution)) + 1;
    int n_el = static_cast<int>(std::floor(kFovElevation / angular_resolution)) + 1;
    for (int ie = 0; ie < n_el; ++ie) {
        double el = -kFovElevation / 2 + ie * angular_resolution;
        for (int ia = 0; ia < n_az; ++ia) {
            double az = -kFovAzimuth / 2 + ia * angular_resolution;
            Vec3 dir_sensor{std::cos(el) * std::sin(az), std::sin(el),
                            std::cos(el) * std::cos(az)};
            Vec3 dir_world = pose.rotation * dir_sensor;
            double best = std::numeric_limits<double>::infinity();
            int best_src = 0;
            Rgb best_color;
            for (size_t i = 0; i < sc.obstacles.size(); ++i) {
                auto t = scene::ray_hit(sc.obstacles[i], pose.translation, dir_world);
                if (t && *t < best) {
                    best = *t;
                    best_src = static_cast<int>(i);
                    best_color = sc.obstacles[i].color;
                }
            }
            for (const auto& body : sc.robot_body) {
                auto t = scene::ray_hit(body, pose.translation, dir_world);
                if (t && *t < best) {
                    best = *t;
                    best_src = -1;
                    best_color = body.color;
                }
            }
            if (std::isfinite(best)) {
                out.cloud.points.push_back({dir_sensor * best, best_color});
                out.source.push_back(best_src);
            }
        }
    }
    return out;
}

inline PointCloud render_point_cloud(const scene::Scene& sc, const RigidTransform& pose,
                                     double angular_resolution) {
    return render_point_cloud_tagged(sc, pose, angular_resolution).cloud;
}

/// Sensor-to-world compensation: tilt about the sensor x axis, then translate.
inline PointCloud transform_cloud(const PointCloud& cloud, double tilt_angle,
                                  const Vec3& translation) {
    if (cloud.frame != Frame::Sensor) throw Error("transform_cloud expects a sensor-frame cloud");
    Mat3 rot = Mat3::rotation_x(tilt_angle);
    PointCloud out;
    out.frame = Frame::World;
    out.points.reserve(cloud.points.size());
    for (const auto& cp : cloud.points) out.points.push_back({rot * cp.position + translation, cp.color});
    return out;
}

inline PointCloud passthrough_filter(const PointCloud& cloud, int axis, double lo, double hi) {
    if (axis < 0 || axis > 2) throw Error("passthrough axis must be 0, 1 or 2");
    if (lo > hi) throw Error("passthrough requires lo <= hi");
    PointCloud out;
    out.frame = cloud.frame;
    for (const auto& cp : cloud.points) {
        double v = cp.position[axis];
        if (v >= lo && v <= hi) out.points.push_back(cp);
    }
    return out;
}

/// Bins points into cubes of side `leaf` and replaces each non-empty bin by
/// its centroid (position and color averaged). Output bins appear in
/// first-member order.
inline PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
    if (leaf <= 0) throw Error("voxel_downsample leaf must be > 0");
    struct Bin {
        Vec3 pos_sum{};
        double r = 0, g = 0, b = 0;
        int count = 0;
        int order = 0;
    };
    std::map<std::array<int64_t, 3>, Bin> bins;
    int next_order = 0;
    for (const auto& cp : cloud.points) {
        std::array<int64_t, 3> key{static_cast<int64_t>(std::floor(cp.position.x / leaf)),
                                   static_cast<int64_t>(std::floor(cp.position.y / leaf)),
                                   static_cast<int64_t>(std::floor(cp.position.z / leaf))};
        auto [it, inserted] = bins.try_emplace(key);
        if (inserted) it->second.order = next_order++;
        Bin& bin = it->second;
        bin.pos_sum += cp.position;
        bin.r += cp.color.r;
        bin.g += cp.color.g;
        bin.b += cp.color.b;
        bin.count += 1;
    }
    std::vector<const Bin*> ordered(bins.size());
    for (const auto& [key, bin] : bins) ordered[bin.order] = &bin;
    PointCloud out;
    out.frame = cloud.frame;
    out.points.reserve(ordered.size());
    for (const Bin* bin : ordered) {
        double inv = 1.0 / bin->count;
        out.points.push_back({bin->pos_sum * inv, {bin->r * inv, bin->g * inv, bin->b * inv}});
    }
    return out;
}

namespace detail {

inline GridIndex3 make_cloud_index(const std::vector<ColoredPoint>& pts) {
    Aabb bb{{0, 0, 0}, {1, 1, 1}};
    if (!pts.empty()) {
        bb.min = bb.max = pts[0].position;
        for (const auto& cp : pts) {
            for (int a = 0; a < 3; ++a) {
                bb.min[a] = std::min(bb.min[a], cp.position[a]);
                bb.max[a] = std::max(bb.max[a], cp.position[a]);
            }
        }
    }
    double side = std::max(bb.max_side(), 1e-6);
    double cell = std::max(side / std::max(1.0, std::cbrt(static_cast<double>(pts.size()))), 1e-6);
    bb.max = bb.min + Vec3{side, side, side};
    GridIndex3 index(bb, cell);
    for (size_t i = 0; i < pts.size(); ++i) index.insert(pts[i].position, static_cast<int>(i));
    return index;
}

/// PCA surface variation over the point and its k neighbors.
inline double surface_variation(const std::vector<ColoredPoint>& pts,
                                const std::vector<int>& neighborhood) {
    Vec3 mean{};
    for (int idx : neighborhood) mean += pts[idx].position;
    mean = mean / static_cast<double>(neighborhood.size());
    double a00 = 0, a01 = 0, a02 = 0, a11 = 0, a12 = 0, a22 = 0;
    for (int idx : neighborhood) {
        Vec3 d = pts[idx].position - mean;
        a00 += d.x * d.x;
        a01 += d.x * d.y;
        a02 += d.x * d.z;
        a11 += d.y * d.y;
        a12 += d.y * d.z;
        a22 += d.z * d.z;
    }
    double inv = 1.0 / static_cast<double>(neighborhood.size());
    auto eig = geom::eigenvalues_sym3(a00 * inv, a01 * inv, a02 * inv, a11 * inv, a12 * inv,
                                      a22 * inv);
    double sum = eig[0] + eig[1] + eig[2];
    if (sum <= 0) return 0.0;
    return std::max(eig[0], 0.0) / sum;
}

struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace detail

/// Color-based region growing. Seeds at the unassigned point of minimum
/// curvature, grows across k-NN adjacency while the neighbor's color stays
/// within threshold_1 of the seed color, then merges adjacent regions whose
/// mean colors are within threshold_2. Points with fewer than 3 neighbors
/// become singleton regions. The result partitions the cloud.
inline std::vector<Region> region_grow_segment(const PointCloud& cloud, int k_neighbors,
                                               double threshold_1, double threshold_2) {
    if (cloud.points.empty()) throw EmptyInputError("region_grow_segment: empty cloud");
    if (k_neighbors < 3) throw Error("region_grow_segment requires k_neighbors >= 3");
    const auto& pts = cloud.points;
    const int n = static_cast<int>(pts.size());
    GridIndex3 index = detail::make_cloud_index(pts);

    // symmetric k-NN adjacency
    std::vector<std::vector<int>> adj(n);
    {
        std::vector<int> nb;
        for (int i = 0; i < n; ++i) {
            index.knn(pts[i].position, k_neighbors + 1, nb);
            for (int j : nb) {
                if (j == i) continue;
                adj[i].push_back(j);
                adj[j].push_back(i);
            }
        }
        for (auto& a : adj) {
            std::sort(a.begin(), a.end());
            a.erase(std::unique(a.begin(), a.end()), a.end());
        }
    }

    std::vector<double> curvature(n);
    {
        std::vector<int> nb, neighborhood;
        for (int i = 0; i < n; ++i) {
            index.knn(pts[i].position, k_neighbors + 1, nb);
            neighborhood.clear();
            neighborhood.push_back(i);
            for (int j : nb)
                if (j != i) neighborhood.push_back(j);
            if (static_cast<int>(neighborhood.size()) < 4) {
                curvature[i] = std::numeric_limits<double>::infinity();  // degenerate: singleton
            } else {
                curvature[i] = detail::surface_variation(pts, neighborhood);
            }
        }
    }

    std::vector<int> seed_order(n);
    for (int i = 0; i < n; ++i) seed_order[i] = i;
    std::sort(seed_order.begin(), seed_order.end(), [&](int a, int b) {
        if (curvature[a] != curvature[b]) return curvature[a] < curvature[b];
        return a < b;
    });

    std::vector<int> region_of(n, -1);
    std::vector<std::vector<int>> groups;
    std::vector<int> queue;
    for (int seed : seed_order) {
        if (region_of[seed] >= 0) continue;
        int rid = static_cast<int>(groups.size());
        groups.emplace_back();
        groups.back().push_back(seed);
        region_of[seed] = rid;
        bool degenerate = std::isinf(curvature[seed]);
        if (!degenerate) {
            const Rgb seed_color = pts[seed].color;
            queue.clear();
            queue.push_back(seed);
            for (size_t qi = 0; qi < queue.size(); ++qi) {
                int p = queue[qi];
                for (int q : adj[p]) {
                    if (region_of[q] >= 0) continue;
                    if (color_distance(pts[q].color, seed_color) <= threshold_1) {
                        region_of[q] = rid;
                        groups[rid].push_back(q);
                        queue.push_back(q);
                    }
                }
            }
        }
    }

    auto mean_of = [&](const std::vector<int>& members) {
        Rgb m{};
        for (int idx : members) {
            m.r += pts[idx].color.r;
            m.g += pts[idx].color.g;
            m.b += pts[idx].color.b;
        }
        double inv = 1.0 / static_cast<double>(members.size());
        return Rgb{m.r * inv, m.g * inv, m.b * inv};
    };

    // merge adjacent regions by mean-color proximity (single pass over the
    // original means)
    const int n_groups = static_cast<int>(groups.size());
    std::vector<Rgb> means(n_groups);
    for (int g = 0; g < n_groups; ++g) means[g] = mean_of(groups[g]);
    detail::Dsu dsu(n_groups);
    for (int p = 0; p < n; ++p) {
        for (int q : adj[p]) {
            int a = region_of[p], b = region_of[q];
            if (a != b && color_distance(means[a], means[b]) <= threshold_2) dsu.unite(a, b);
        }
    }

    std::vector<std::vector<int>> merged(n_groups);
    for (int g = 0; g < n_groups; ++g) {
        auto& dst = merged[dsu.find(g)];
        dst.insert(dst.end(), groups[g].begin(), groups[g].end());
    }
    std::vector<Region> out;
    for (auto& members : merged) {
        if (members.empty()) continue;
        std::sort(members.begin(), members.end());
        out.push_back({members, mean_of(members)});
    }
    std::sort(out.begin(), out.end(),
              [](const Region& a, const Region& b) { return a.indices[0] < b.indices[0]; });
    return out;
}

/// Self-identification: drops every region whose mean color is within
/// `tolerance` of the reference (robot) color.
inline PointCloud remove_robot_regions(const PointCloud& cloud, const std::vector<Region>& regions,
                                       const Rgb& reference_color, double tolerance) {
    std::vector<char> drop(cloud.points.size(), 0);
    for (const auto& region : regions) {
        if (color_distance(region.mean_color, reference_color) <= tolerance)
            for (int idx : region.indices) drop[idx] = 1;
    }
    PointCloud out;
    out.frame = cloud.frame;
    for (size_t i = 0; i < cloud.points.size(); ++i)
        if (!drop[i]) out.points.push_back(cloud.points[i]);
    return out;
}

// --- Cloud file ---------------------------------------------------------------

inline std::string to_text(const PointCloud& cloud) {
    std::string out = "# frame=";
    out += cloud.frame == Frame::Sensor ? "sensor" : "world";
    out += " count=" + std::to_string(cloud.points.size()) + "\n";
    for (const auto& cp : cloud.points) {
        out += io::fmt_real(cp.position.x);
        out += ' ';
        out += io::fmt_real(cp.position.y);
        out += ' ';
        out += io::fmt_real(cp.position.z);
        char col[48];
        std::snprintf(col, sizeof(col), " %lld %lld %lld\n",
                      static_cast<long long>(std::llround(cp.color.r)),
                      static_cast<long long>(std::llround(cp.color.g)),
                      static_cast<long long>(std::llround(cp.color.b)));
        out += col;
    }
    return out;
}

inline PointCloud from_text(const std::string& text) {
    PointCloud out;
    size_t pos = text.find('\n');
    if (pos == std::string::npos) throw CorruptFileError("cloud file: missing header");
    std::string header = text.substr(0, pos);
    if (header.rfind("# frame=", 0) != 0) throw CorruptFileError("cloud file: bad header");
    out.frame = header.find("frame=world") != std::string::npos ? Frame::World : Frame::Sensor;
    const char* p = text.data() + pos + 1;
    const char* end = text.data() + text.size();
    while (p < end) {
        ColoredPoint cp;
        char* next = nullptr;
        cp.position.x = std::strtod(p, &next);
        if (next == p) break;
        p = next;
        cp.position.y = std::strtod(p, &next);
        p = next;
        cp.position.z = std::strtod(p, &next);
        p = next;
        cp.color.r = std::strtod(p, &next);
        p = next;
        cp.color.g = std::strtod(p, &next);
        p = next;
        cp.color.b = std::strtod(p, &next);
        p = next;
        out.points.push_back(cp);
    }
    return out;
}

inline void save(const PointCloud& cloud, const std::string& path) {
    io::write_file(path, to_text(cloud));
}
inline PointCloud load(const std::string& path) { return from_text(io::read_file(path)); }

}  // namespace bplan::perception

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "bplan/core.hpp"
#include "bplan/error.hpp"
#include "bplan/geometry.hpp"
#include "bplan/io.hpp"
#include "bplan/rng.hpp"

#include <json.hpp>

namespace bplan::scene {

using Shape = std::variant<geom::BoxShape, geom::SphereShape, geom::CylinderShape>;

struct Obstacle {
    Shape shape;
    Rgb color;
};

inline bool contains(const Obstacle& o, const Point3& p) {
    return std::visit([&](const auto& s) { return geom::contains(s, p); }, o.shape);
}

inline std::optional<double> ray_hit(const Obstacle& o, const Point3& origin, const Vec3& dir) {
    return std::visit([&](const auto& s) { return geom::ray_hit(s, origin, dir); }, o.shape);
}

inline bool segment_intersects(const Obstacle& o, const Point3& a, const Point3& b) {
    return std::visit([&](const auto& s) { return geom::segment_intersects(s, a, b); }, o.shape);
}

inline bool overlaps_aabb(const Obstacle& o, const Vec3& bmin, const Vec3& bmax) {
    return std::visit([&](const auto& s) { return geom::overlaps_aabb(s, bmin, bmax); }, o.shape);
}

inline Aabb bounding_box(const Obstacle& o) {
    return std::visit([](const auto& s) { return geom::bounding_box(s); }, o.shape);
}

/// Reference color of the simulated manipulator body.
inline constexpr Rgb kRobotOrange{255, 102, 0};

struct Scene {
    std::vector<Obstacle> obstacles;
    Aabb bounds = default_bounds();
    std::vector<Obstacle> robot_body;  // excluded from planner collision checks

    bool blocked(const Point3& p) const {
        for (const auto& o : obstacles)
            if (contains(o, p)) return true;
        return false;
    }
    bool segment_blocked(const Point3& a, const Point3& b) const {
        for (const auto& o : obstacles)
            if (segment_intersects(o, a, b)) return true;
        return false;
    }
};

struct PlanningQuery {
    Point3 start;
    Point3 goal;
};

enum class Family { Elongated, NarrowCircular, Cluttered };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::Elongated: return "elongated";
        case Family::NarrowCircular: return "narrow_circular";
        case Family::Cluttered: return "cluttered";
    }
    return "?";
}

inline Family parse_family(const std::string& s) {
    if (s == "elongated") return Family::Elongated;
    if (s == "narrow_circular") return Family::NarrowCircular;
    if (s == "cluttered") return Family::Cluttered;
    throw Error("unknown scene family: " + s);
}

namespace detail {

/// Obstacle palette stays far from the robot orange so self-identification
/// cannot alias scenery with the manipulator.
inline Rgb random_obstacle_color(Rng& rng) {
    for (;;) {
        Rgb c{static_cast<double>(rng.uniform_index(256)),
              static_cast<double>(rng.uniform_index(256)),
              static_cast<double>(rng.uniform_index(256))};
        if (color_distance(c, kRobotOrange) > 80.0) return c;
    }
}

// keeps generated geometry strictly inside bounds under fp rounding
inline constexpr double kBoundsMargin = 1e-9;

inline Scene make_elongated(Rng& rng) {
    Scene sc;
    const double zlo = sc.bounds.min.z, zhi = sc.bounds.max.z;
    const double xlo = sc.bounds.min.x + kBoundsMargin, xhi = sc.bounds.max.x - kBoundsMargin;
    double wall_y = rng.uniform(-0.5, 0.5);
    double thickness = rng.uniform(0.22, 0.32);
    int n_pillars = 2 + static_cast<int>(rng.uniform_index(3));  // 2..4
    int passable_slot = static_cast<int>(rng.uniform_index(n_pillars - 1));
    std::vector<double> gaps(n_pillars - 1);
    for (int i = 0; i < n_pillars - 1; ++i)
        gaps[i] = (i == passable_slot) ? rng.uniform(0.28, 0.34) : rng.uniform(0.02, 0.08);
    double gap_total = 0;
    for (double g : gaps) gap_total += g;
    std::vector<double> prop(n_pillars);
    double prop_sum = 0;
    for (auto& p : prop) {
        p = rng.uniform(0.5, 1.5);
        prop_sum += p;
    }
    double solid = (xhi - xlo) - gap_total;
    double cx = xlo;
    for (int i = 0; i < n_pillars; ++i) {
        double w = solid * prop[i] / prop_sum;
        geom::BoxShape box;
        box.center = {cx + w / 2, wall_y, (zlo + zhi) / 2};
        box.half = {w / 2, thickness / 2, (zhi - zlo) / 2};
        box.yaw = 0.0;
        sc.obstacles.push_back({box, random_obstacle_color(rng)});
        cx += w;
        if (i < n_pillars - 1) cx += gaps[i];
    }
    return sc;
}

inline Scene make_narrow_circular(Rng& rng) {
    Scene sc;
    const double zlo = sc.bounds.min.z, zhi = sc.bounds.max.z;
    double r_cyl = rng.uniform(0.14, 0.17);
    // the ring nearly touches the side walls: the leftover sliver is too thin
    // to pass, so the exterior decomposes into corner pockets and the angular
    // opening is the only way in. Aiming the opening at a corner diagonal
    // keeps its pocket roomy.
    double sliver = rng.uniform(0.02, 0.05);
    double ring_r = sc.bounds.max.x - r_cyl - sliver;
    double opening_width = rng.uniform(0.26, 0.31);
    double opening_angle = 2.0 * std::asin((opening_width + 2 * r_cyl) / (2 * ring_r));
    int corner = static_cast<int>(rng.uniform_index(4));
    double opening_center = M_PI / 4 + corner * M_PI / 2 + rng.uniform(-0.35, 0.35);
    double arc = 2 * M_PI - opening_angle;
    // adjacent cylinders must overlap on the ring mid-circle, so the annulus
    // has exactly one free arc
    double max_step = 2.0 * std::asin(0.98 * r_cyl / ring_r);
    int n = static_cast<int>(std::ceil(arc / max_step)) + 1;
    double theta0 = opening_center + opening_angle / 2;
    for (int i = 0; i < n; ++i) {
        double theta = theta0 + arc * static_cast<double>(i) / (n - 1);
        geom::CylinderShape cyl;
        cyl.base_center = {ring_r * std::cos(theta), ring_r * std::sin(theta), zlo};
        cyl.radius = r_cyl;
        cyl.height = zhi - zlo;
        sc.obstacles.push_back({cyl, random_obstacle_color(rng)});
    }
    return sc;
}

inline Scene make_cluttered(Rng& rng) {
    Scene sc;
    const double layer_top = 2.2;  // clutter sits low; space above stays open
    int n = 13 + static_cast<int>(rng.uniform_index(3));  // 13..15
    for (int i = 0; i < n; ++i) {
        Rgb color = random_obstacle_color(rng);
        if (rng.uniform_index(2) == 0) {
            geom::BoxShape box;
            box.half = {rng.uniform(0.16, 0.34), rng.uniform(0.16, 0.34), rng.uniform(0.16, 0.34)};
            box.yaw = rng.uniform(0, M_PI);
            Aabb bb = geom::bounding_box(geom::BoxShape{{0, 0, 0}, box.half, box.yaw});
            double ex = bb.max.x + kBoundsMargin, ey = bb.max.y + kBoundsMargin;
            box.center = {rng.uniform(sc.bounds.min.x + ex, sc.bounds.max.x - ex),
                          rng.uniform(sc.bounds.min.y + ey, sc.bounds.max.y - ey),
                          rng.uniform(box.half.z + kBoundsMargin, layer_top - box.half.z)};
            sc.obstacles.push_back({box, color});
        } else {
            geom::SphereShape sph;
            sph.radius = rng.uniform(0.18, 0.34);
            double pad = sph.radius + kBoundsMargin;
            sph.center = {rng.uniform(sc.bounds.min.x + pad, sc.bounds.max.x - pad),
                          rng.uniform(sc.bounds.min.y + pad, sc.bounds.max.y - pad),
                          rng.uniform(pad, layer_top - sph.radius)};
            sc.obstacles.push_back({sph, color});
        }
    }
    return sc;
}

}  // namespace detail

/// Deterministic benchmark scene generator; identical (family, seed) pairs
/// yield identical scenes.
inline Scene make_scene(Family family, uint64_t seed) {
    Rng rng(derive_seed(seed, static_cast<uint64_t>(family) + 1));
    switch (family) {
        case Family::Elongated: return detail::make_elongated(rng);
        case Family::NarrowCircular: return detail::make_narrow_circular(rng);
        case Family::Cluttered: return detail::make_cluttered(rng);
    }
    throw Error("unreachable");
}

/// Adds the simulated manipulator body: a short stack of orange boxes.
inline void add_robot_body(Scene& sc, const Point3& base = {0, 0, 0}) {
    auto add = [&](Vec3 center, Vec3 half) {
        sc.robot_body.push_back({geom::BoxShape{base + center, half, 0.0}, kRobotOrange});
    };
    add({0, 0, 0.2}, {0.18, 0.18, 0.2});
    add({0, 0, 0.55}, {0.12, 0.12, 0.15});
    add({0.05, 0, 0.85}, {0.20, 0.08, 0.08});
}

// --- Scene file --------------------------------------------------------------

namespace detail {

inline void write_params(std::string& out, const std::vector<double>& params) {
    out += '[';
    for (size_t i = 0; i < params.size(); ++i) {
        if (i) out += ", ";
        out += io::fmt_real(params[i]);
    }
    out += ']';
}

inline void write_obstacle(std::string& out, const Obstacle& o) {
    out += "    {\"shape\": \"";
    std::vector<double> params;
    if (const auto* b = std::get_if<geom::BoxShape>(&o.shape)) {
        out += "box";
        params = {b->center.x, b->center.y, b->center.z, b->half.x, b->half.y, b->half.z, b->yaw};
    } else if (const auto* s = std::get_if<geom::SphereShape>(&o.shape)) {
        out += "sphere";
        params = {s->center.x, s->center.y, s->center.z, s->radius};
    } else {
        const auto& c = std::get<geom::CylinderShape>(o.shape);
        out += "cylinder";
        params = {c.base_center.x, c.base_center.y, c.base_center.z, c.radius, c.height};
    }
    out += "\", \"params\": ";
    write_params(out, params);
    char col[64];
    std::snprintf(col, sizeof(col), ", \"color\": [%d, %d, %d]}", static_cast<int>(o.color.r),
                  static_cast<int>(o.color.g), static_cast<int>(o.color.b));
    out += col;
}

}  // namespace detail

inline std::string to_text(const Scene& sc) {
    std::string out = "{\n  \"obstacles\": [\n";
    for (size_t i = 0; i < sc.obstacles.size(); ++i) {
        detail::write_obstacle(out, sc.obstacles[i]);
        out += (i + 1 < sc.obstacles.size()) ? ",\n" : "\n";
    }
    out += "  ],\n";
    if (!sc.robot_body.empty()) {
        out += "  \"robot_body\": [\n";
        for (size_t i = 0; i < sc.robot_body.size(); ++i) {
            detail::write_obstacle(out, sc.robot_body[i]);
            out += (i + 1 < sc.robot_body.size()) ? ",\n" : "\n";
        }
        out += "  ],\n";
    }
    out += "  \"bounds\": {\"min\": ";
    detail::write_params(out, {sc.bounds.min.x, sc.bounds.min.y, sc.bounds.min.z});
    out += ", \"max\": ";
    detail::write_params(out, {sc.bounds.max.x, sc.bounds.max.y, sc.bounds.max.z});
    out += "}\n}\n";
    return out;
}

namespace detail {

inline Obstacle parse_obstacle(const nlohmann::json& j) {
    Obstacle o;
    const auto& params = j.at("params");
    std::string shape = j.at("shape");
    if (shape == "box") {
        geom::BoxShape b;
        b.center = {params.at(0), params.at(1), params.at(2)};
        b.half = {params.at(3), params.at(4), params.at(5)};
        b.yaw = params.at(6);
        if (b.half.x <= 0 || b.half.y <= 0 || b.half.z <= 0) throw Error("box extents must be > 0");
        o.shape = b;
    } else if (shape == "sphere") {
        geom::SphereShape s;
        s.center = {params.at(0), params.at(1), params.at(2)};
        s.radius = params.at(3);
        if (s.radius <= 0) throw Error("sphere radius must be > 0");
        o.shape = s;
    } else if (shape == "cylinder") {
        geom::CylinderShape c;
        c.base_center = {params.at(0), params.at(1), params.at(2)};
        c.radius = params.at(3);
        c.height = params.at(4);
        if (c.radius <= 0 || c.height <= 0) throw Error("cylinder dimensions must be > 0");
        o.shape = c;
    } else {
        throw Error("unknown shape: " + shape);
    }
    const auto& col = j.at("color");
    o.color = {col.at(0), col.at(1), col.at(2)};
    if (o.color.r < 0 || o.color.r > 255 || o.color.g < 0 || o.color.g > 255 || o.color.b < 0 ||
        o.color.b > 255)
        throw Error("color components must be in [0,255]");
    return o;
}

}  // namespace detail

inline Scene from_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("scene parse error: ") + e.what());
    }
    Scene sc;
    for (const auto& jo : j.at("obstacles")) sc.obstacles.push_back(detail::parse_obstacle(jo));
    if (j.contains("robot_body"))
        for (const auto& jo : j.at("robot_body")) sc.robot_body.push_back(detail::parse_obstacle(jo));
    const auto& jb = j.at("bounds");
    sc.bounds.min = {jb.at("min").at(0), jb.at("min").at(1), jb.at("min").at(2)};
    sc.bounds.max = {jb.at("max").at(0), jb.at("max").at(1), jb.at("max").at(2)};
    if (sc.bounds.min.x >= sc.bounds.max.x || sc.bounds.min.y >= sc.bounds.max.y ||
        sc.bounds.min.z >= sc.bounds.max.z)
        throw Error("bounds must have positive volume");
    return sc;
}

inline void save(const Scene& sc, const std::string& path) { io::write_file(path, to_text(sc)); }
inline Scene load(const std::string& path) { return from_text(io::read_file(path)); }

}  // namespace bplan::scene

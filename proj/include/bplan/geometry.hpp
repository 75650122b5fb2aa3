#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include "bplan/core.hpp"

namespace bplan::geom {

// --- Primitive shapes -------------------------------------------------------

/// Box with a yaw rotation about the world z axis.
struct BoxShape {
    Vec3 center;
    Vec3 half;  // half extents along the box's own axes
    double yaw = 0.0;
};

struct SphereShape {
    Vec3 center;
    double radius = 0.0;
};

/// Upright cylinder; axis is +z from base_center.
struct CylinderShape {
    Vec3 base_center;
    double radius = 0.0;
    double height = 0.0;
};

// --- Containment -------------------------------------------------------------

inline Vec3 to_box_frame(const BoxShape& b, const Point3& p) {
    double c = std::cos(b.yaw), s = std::sin(b.yaw);
    Vec3 d = p - b.center;
    return {c * d.x + s * d.y, -s * d.x + c * d.y, d.z};
}

inline bool contains(const BoxShape& b, const Point3& p) {
    Vec3 q = to_box_frame(b, p);
    return std::abs(q.x) <= b.half.x && std::abs(q.y) <= b.half.y && std::abs(q.z) <= b.half.z;
}

inline bool contains(const SphereShape& s, const Point3& p) {
    return squared_distance(s.center, p) <= s.radius * s.radius;
}

inline bool contains(const CylinderShape& c, const Point3& p) {
    if (p.z < c.base_center.z || p.z > c.base_center.z + c.height) return false;
    double dx = p.x - c.base_center.x, dy = p.y - c.base_center.y;
    return dx * dx + dy * dy <= c.radius * c.radius;
}

// --- Ray intersection --------------------------------------------------------
// Rays have unit-ish direction; the returned t is in units of |dir|.

inline std::optional<double> ray_hit(const SphereShape& s, const Point3& o, const Vec3& dir) {
    Vec3 oc = o - s.center;
    double a = dir.dot(dir);
    double b = 2.0 * oc.dot(dir);
    double c = oc.dot(oc) - s.radius * s.radius;
    double disc = b * b - 4 * a * c;
    if (disc < 0) return std::nullopt;
    double sq = std::sqrt(disc);
    double t0 = (-b - sq) / (2 * a);
    double t1 = (-b + sq) / (2 * a);
    if (t0 > 1e-12) return t0;
    if (t1 > 1e-12) return t1;
    return std::nullopt;
}

/// Slab test against an axis-aligned box given by min/max corners.
inline std::optional<double> ray_hit_aabb(const Vec3& bmin, const Vec3& bmax, const Point3& o,
                                          const Vec3& dir) {
    double tnear = -std::numeric_limits<double>::infinity();
    double tfar = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        double lo = bmin[i], hi = bmax[i], oi = o[i], di = dir[i];
        if (di == 0.0) {
            if (oi < lo || oi > hi) return std::nullopt;
            continue;
        }
        double t0 = (lo - oi) / di, t1 = (hi - oi) / di;
        if (t0 > t1) std::swap(t0, t1);
        tnear = std::max(tnear, t0);
        tfar = std::min(tfar, t1);
        if (tnear > tfar) return std::nullopt;
    }
    if (tfar < 1e-12) return std::nullopt;
    return tnear > 1e-12 ? tnear : tfar;
}

inline std::optional<double> ray_hit(const BoxShape& b, const Point3& o, const Vec3& dir) {
    double c = std::cos(b.yaw), s = std::sin(b.yaw);
    Vec3 od = o - b.center;
    Point3 o2{c * od.x + s * od.y, -s * od.x + c * od.y, od.z};
    Vec3 d2{c * dir.x + s * dir.y, -s * dir.x + c * dir.y, dir.z};
    return ray_hit_aabb(-b.half, b.half, o2, d2);
}

inline std::optional<double> ray_hit(const CylinderShape& cyl, const Point3& o, const Vec3& dir) {
    double z0 = cyl.base_center.z, z1 = cyl.base_center.z + cyl.height;
    double best = std::numeric_limits<double>::infinity();
    // side surface
    double ox = o.x - cyl.base_center.x, oy = o.y - cyl.base_center.y;
    double a = dir.x * dir.x + dir.y * dir.y;
    if (a > 0) {
        double b = 2.0 * (ox * dir.x + oy * dir.y);
        double c = ox * ox + oy * oy - cyl.radius * cyl.radius;
        double disc = b * b - 4 * a * c;
        if (disc >= 0) {
            double sq = std::sqrt(disc);
            for (double t : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}) {
                if (t > 1e-12 && t < best) {
                    double z = o.z + t * dir.z;
                    if (z >= z0 && z <= z1) best = t;
                }
            }
        }
    }
    // caps
    if (dir.z != 0.0) {
        for (double zc : {z0, z1}) {
            double t = (zc - o.z) / dir.z;
            if (t > 1e-12 && t < best) {
                double x = ox + t * dir.x, y = oy + t * dir.y;
                if (x * x + y * y <= cyl.radius * cyl.radius) best = t;
            }
        }
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

template <typename Shape>
bool segment_intersects(const Shape& shape, const Point3& a, const Point3& b) {
    if (contains(shape, a) || contains(shape, b)) return true;
    Vec3 d = b - a;
    auto t = ray_hit(shape, a, d);
    return t && *t <= 1.0;
}

// --- Shape vs axis-aligned cube overlap (voxelization) -----------------------

inline bool overlaps_aabb(const SphereShape& s, const Vec3& bmin, const Vec3& bmax) {
    Aabb box{bmin, bmax};
    return box.distance_to(s.center) <= s.radius;
}

namespace detail {
/// 2D separating-axis test between an axis-aligned rect and a yawed rect.
inline bool rects_overlap_2d(double axmin, double axmax, double aymin, double aymax, double cx,
                             double cy, double hx, double hy, double yaw) {
    double c = std::cos(yaw), s = std::sin(yaw);
    // corners of the rotated rect
    std::array<std::array<double, 2>, 4> rot;
    int idx = 0;
    for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0}) {
            rot[idx][0] = cx + c * sx * hx - s * sy * hy;
            rot[idx][1] = cy + s * sx * hx + c * sy * hy;
            ++idx;
        }
    std::array<std::array<double, 2>, 4> axes{{{1, 0}, {0, 1}, {c, s}, {-s, c}}};
    std::array<std::array<double, 2>, 4> axr{{{axmin, aymin}, {axmax, aymin}, {axmin, aymax},
                                              {axmax, aymax}}};
    for (const auto& ax : axes) {
        double lo1 = std::numeric_limits<double>::infinity(), hi1 = -lo1;
        for (const auto& p : axr) {
            double v = ax[0] * p[0] + ax[1] * p[1];
            lo1 = std::min(lo1, v);
            hi1 = std::max(hi1, v);
        }
        double lo2 = std::numeric_limits<double>::infinity(), hi2 = -lo2;
        for (const auto& p : rot) {
            double v = ax[0] * p[0] + ax[1] * p[1];
            lo2 = std::min(lo2, v);
            hi2 = std::max(hi2, v);
        }
        if (hi1 < lo2 || hi2 < lo1) return false;
    }
    return true;
}
}  // namespace detail

inline bool overlaps_aabb(const BoxShape& b, const Vec3& bmin, const Vec3& bmax) {
    if (b.center.z + b.half.z < bmin.z || b.center.z - b.half.z > bmax.z) return false;
    return detail::rects_overlap_2d(bmin.x, bmax.x, bmin.y, bmax.y, b.center.x, b.center.y,
                                    b.half.x, b.half.y, b.yaw);
}

inline bool overlaps_aabb(const CylinderShape& c, const Vec3& bmin, const Vec3& bmax) {
    if (c.base_center.z + c.height < bmin.z || c.base_center.z > bmax.z) return false;
    double dx = std::max({bmin.x - c.base_center.x, 0.0, c.base_center.x - bmax.x});
    double dy = std::max({bmin.y - c.base_center.y, 0.0, c.base_center.y - bmax.y});
    return dx * dx + dy * dy <= c.radius * c.radius;
}

// --- Bounding boxes ----------------------------------------------------------

inline Aabb bounding_box(const BoxShape& b) {
    double c = std::abs(std::cos(b.yaw)), s = std::abs(std::sin(b.yaw));
    Vec3 e{c * b.half.x + s * b.half.y, s * b.half.x + c * b.half.y, b.half.z};
    return {b.center - e, b.center + e};
}

inline Aabb bounding_box(const SphereShape& s) {
    Vec3 r{s.radius, s.radius, s.radius};
    return {s.center - r, s.center + r};
}

inline Aabb bounding_box(const CylinderShape& c) {
    return {{c.base_center.x - c.radius, c.base_center.y - c.radius, c.base_center.z},
            {c.base_center.x + c.radius, c.base_center.y + c.radius, c.base_center.z + c.height}};
}

// --- Symmetric 3x3 eigenvalues (ascending) -----------------------------------
// Trigonometric closed form; used for PCA surface variation.

inline std::array<double, 3> eigenvalues_sym3(double a00, double a01, double a02, double a11,
                                              double a12, double a22) {
    double p1 = a01 * a01 + a02 * a02 + a12 * a12;
    if (p1 == 0.0) {
        std::array<double, 3> e{a00, a11, a22};
        std::sort(e.begin(), e.end());
        return e;
    }
    double q = (a00 + a11 + a22) / 3.0;
    double p2 = (a00 - q) * (a00 - q) + (a11 - q) * (a11 - q) + (a22 - q) * (a22 - q) + 2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    double b00 = (a00 - q) / p, b01 = a01 / p, b02 = a02 / p;
    double b11 = (a11 - q) / p, b12 = a12 / p, b22 = (a22 - q) / p;
    double detb = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
                  b02 * (b01 * b12 - b11 * b02);
    double r = std::clamp(detb / 2.0, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    double e2 = q + 2.0 * p * std::cos(phi);
    double e0 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    double e1 = 3.0 * q - e0 - e2;
    std::array<double, 3> e{e0, e1, e2};
    std::sort(e.begin(), e.end());
    return e;
}

}  // namespace bplan::geom

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace bplan {

/// 3D point / vector, meters.
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
    constexpr bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    constexpr double squared_norm() const { return dot(*this); }
    Vec3 normalized() const {
        double n = norm();
        return n > 0.0 ? *this / n : Vec3{0, 0, 0};
    }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

using Point3 = Vec3;

inline double distance(const Point3& a, const Point3& b) { return (a - b).norm(); }
inline double squared_distance(const Point3& a, const Point3& b) { return (a - b).squared_norm(); }

/// Axis-aligned box, the workspace / sampling domain.
struct Aabb {
    Vec3 min, max;

    Vec3 center() const { return (min + max) * 0.5; }
    Vec3 extent() const { return max - min; }
    double max_side() const {
        Vec3 e = extent();
        return std::max({e.x, e.y, e.z});
    }
    double diagonal() const { return extent().norm(); }
    double volume() const {
        Vec3 e = extent();
        return e.x * e.y * e.z;
    }
    bool contains(const Point3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
               p.z <= max.z;
    }
    bool contains(const Aabb& o) const { return contains(o.min) && contains(o.max); }
    Point3 clamp(const Point3& p) const {
        return {std::clamp(p.x, min.x, max.x), std::clamp(p.y, min.y, max.y),
                std::clamp(p.z, min.z, max.z)};
    }
    /// Euclidean distance from p to this box (0 if inside).
    double distance_to(const Point3& p) const {
        double dx = std::max({min.x - p.x, 0.0, p.x - max.x});
        double dy = std::max({min.y - p.y, 0.0, p.y - max.y});
        double dz = std::max({min.z - p.z, 0.0, p.z - max.z});
        return std::sqrt(dx * dx + dy * dy + dz * dz);
    }
};

/// Default workspace: 32 descriptor voxels of 0.1 m per axis.
inline Aabb default_bounds() { return Aabb{{-1.6, -1.6, 0.0}, {1.6, 1.6, 3.2}}; }

inline constexpr double kDefaultEndEffectorRadius = 0.05;

/// RGB color; components are stored as reals so region means stay exact.
struct Rgb {
    double r = 0.0, g = 0.0, b = 0.0;

    constexpr bool operator==(const Rgb& o) const { return r == o.r && g == o.g && b == o.b; }
};

inline double color_distance(const Rgb& a, const Rgb& b) {
    double dr = a.r - b.r, dg = a.g - b.g, db = a.b - b.b;
    return std::sqrt(dr * dr + dg * dg + db * db);
}

/// Row-major 3x3 matrix; enough for the rigid transforms the sensor sim needs.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return {}; }
    static Mat3 rotation_x(double angle) {
        double c = std::cos(angle), s = std::sin(angle);
        return {{1, 0, 0, 0, c, -s, 0, s, c}};
    }
    static Mat3 rotation_z(double angle) {
        double c = std::cos(angle), s = std::sin(angle);
        return {{c, -s, 0, s, c, 0, 0, 0, 1}};
    }
    static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
        return {{c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z}};
    }
    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    /// Inverse rotation applied to v (transpose multiply).
    Vec3 transposed_mul(const Vec3& v) const {
        return {m[0] * v.x + m[3] * v.y + m[6] * v.z, m[1] * v.x + m[4] * v.y + m[7] * v.z,
                m[2] * v.x + m[5] * v.y + m[8] * v.z};
    }
};

/// Rigid transform mapping local (sensor) coordinates into world coordinates.
struct RigidTransform {
    Mat3 rotation;
    Vec3 translation;

    Point3 apply(const Point3& p) const { return rotation * p + translation; }
    Point3 apply_inverse(const Point3& p) const { return rotation.transposed_mul(p - translation); }
};

/// Camera-style pose at `eye` with the sensor +z axis aimed at `target`.
/// Sensor frame: +z forward, +x right, +y up.
inline RigidTransform look_at(const Point3& eye, const Point3& target) {
    Vec3 fwd = (target - eye).normalized();
    Vec3 right = Vec3{0, 0, 1}.cross(fwd);
    if (right.squared_norm() < 1e-12) {
        right = Vec3{1, 0, 0}.cross(fwd);  // looking straight up/down
    }
    right = right.normalized();
    Vec3 up = fwd.cross(right);
    return {Mat3::from_columns(right, up, fwd), eye};
}

}  // namespace bplan

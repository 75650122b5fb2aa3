#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bplan/core.hpp"
#include "bplan/error.hpp"
#include "bplan/io.hpp"
#include "bplan/occupancy.hpp"

namespace bplan::smoothing {

struct BezierSegment {
    Point3 p0, p1, p2, p3;

    Point3 eval(double t) const {
        double u = 1.0 - t;
        return p0 * (u * u * u) + p1 * (3 * u * u * t) + p2 * (3 * u * t * t) + p3 * (t * t * t);
    }
};

struct SmoothPath {
    std::vector<BezierSegment> segments;
    double tension = 1.0 / 3.0;
};

/// One cubic segment per knot pair; interior tangents are centered
/// differences, endpoint tangents one-sided, giving a C1 chain that
/// interpolates every knot.
inline SmoothPath fit_bezier_chain(const std::vector<Point3>& path, double tension = 1.0 / 3.0) {
    if (path.size() < 2) throw TooFewWaypointsError("bezier chain needs at least 2 waypoints");
    const size_t n = path.size();
    std::vector<Vec3> tangent(n);
    tangent[0] = path[1] - path[0];
    tangent[n - 1] = path[n - 1] - path[n - 2];
    for (size_t i = 1; i + 1 < n; ++i) tangent[i] = (path[i + 1] - path[i - 1]) * 0.5;
    SmoothPath out;
    out.tension = tension;
    out.segments.reserve(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
        BezierSegment seg;
        seg.p0 = path[i];
        seg.p3 = path[i + 1];
        seg.p1 = path[i] + tangent[i] * tension;
        seg.p2 = path[i + 1] - tangent[i + 1] * tension;
        out.segments.push_back(seg);
    }
    return out;
}

/// Uniform-in-t samples, n per segment including both endpoints; duplicate
/// joint points are emitted once, so n = 2 returns exactly the knots.
inline std::vector<Point3> sample_curve(const SmoothPath& smooth, int n_per_segment) {
    if (n_per_segment < 2) throw Error("sample_curve needs n_per_segment >= 2");
    std::vector<Point3> out;
    for (size_t s = 0; s < smooth.segments.size(); ++s) {
        int j0 = (s == 0) ? 0 : 1;
        for (int j = j0; j < n_per_segment; ++j)
            out.push_back(smooth.segments[s].eval(static_cast<double>(j) / (n_per_segment - 1)));
    }
    return out;
}

/// Re-validates the curve against the map; curvature can cut corners the
/// piecewise-linear path cleared. Sampling density derives from the control
/// polygon (|B'| <= 3 * max control edge).
inline bool validate_smooth(const SmoothPath& smooth, const occupancy::OccupancyOctree& map,
                            double delta, double ee_radius) {
    for (const auto& seg : smooth.segments) {
        double max_edge = std::max({distance(seg.p0, seg.p1), distance(seg.p1, seg.p2),
                                    distance(seg.p2, seg.p3)});
        int n = std::max(1, static_cast<int>(std::ceil(3.0 * max_edge / delta)));
        for (int i = 0; i <= n; ++i) {
            Point3 p = seg.eval(static_cast<double>(i) / n);
            if (!map.bounds().contains(p)) return false;
            if (map.collides_sphere(p, ee_radius)) return false;
        }
    }
    return true;
}

inline std::string to_text(const SmoothPath& smooth, int n_per_segment = 16) {
    std::string out = "# segments=" + std::to_string(smooth.segments.size()) +
                      " tension=" + io::fmt_real(smooth.tension) + "\n";
    for (const auto& p : sample_curve(smooth, n_per_segment)) {
        out += io::fmt_real(p.x);
        out += ' ';
        out += io::fmt_real(p.y);
        out += ' ';
        out += io::fmt_real(p.z);
        out += '\n';
    }
    return out;
}

}  // namespace bplan::smoothing

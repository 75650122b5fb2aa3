#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bplan/core.hpp"

namespace bplan {

/// Uniform-grid point index with exact k-nearest queries (ring expansion with
/// a distance bound, so results match a full sort). Ties break on lower id.
class GridIndex3 {
public:
    GridIndex3() = default;
    GridIndex3(const Aabb& bounds, double cell_size) : bounds_(bounds), cell_(cell_size) {
        Vec3 e = bounds.extent();
        nx_ = std::max(1, static_cast<int>(std::ceil(e.x / cell_)));
        ny_ = std::max(1, static_cast<int>(std::ceil(e.y / cell_)));
        nz_ = std::max(1, static_cast<int>(std::ceil(e.z / cell_)));
        cells_.resize(static_cast<size_t>(nx_) * ny_ * nz_);
    }

    void insert(const Point3& p, int id) {
        cells_[cell_index(p)].push_back({p, id});
        ++count_;
    }

    int size() const { return count_; }

    /// Exact k nearest neighbors of q (by Euclidean distance, ties by id).
    void knn(const Point3& q, int k, std::vector<int>& out) const {
        out.clear();
        if (count_ == 0 || k <= 0) return;
        scratch_.clear();
        int cx, cy, cz;
        cell_coords(q, cx, cy, cz);
        int max_ring = std::max({nx_, ny_, nz_});
        for (int r = 0; r <= max_ring; ++r) {
            visit_ring(cx, cy, cz, r, q);
            if (static_cast<int>(scratch_.size()) >= k) {
                std::nth_element(scratch_.begin(), scratch_.begin() + (k - 1), scratch_.end());
                double kth = std::sqrt(scratch_[k - 1].first);
                // points in rings > r are at distance >= r * cell from q
                if (kth <= static_cast<double>(r) * cell_) break;
            }
        }
        size_t take = std::min<size_t>(k, scratch_.size());
        std::partial_sort(scratch_.begin(), scratch_.begin() + take, scratch_.end());
        for (size_t i = 0; i < take; ++i) out.push_back(scratch_[i].second);
    }

private:
    void cell_coords(const Point3& p, int& cx, int& cy, int& cz) const {
        cx = std::clamp(static_cast<int>((p.x - bounds_.min.x) / cell_), 0, nx_ - 1);
        cy = std::clamp(static_cast<int>((p.y - bounds_.min.y) / cell_), 0, ny_ - 1);
        cz = std::clamp(static_cast<int>((p.z - bounds_.min.z) / cell_), 0, nz_ - 1);
    }
    size_t cell_index(const Point3& p) const {
        int cx, cy, cz;
        cell_coords(p, cx, cy, cz);
        return static_cast<size_t>(cx) + static_cast<size_t>(nx_) * (cy + static_cast<size_t>(ny_) * cz);
    }
    void scan_cell(int cx, int cy, int cz, const Point3& q) const {
        if (cx < 0 || cy < 0 || cz < 0 || cx >= nx_ || cy >= ny_ || cz >= nz_) return;
        const auto& cell = cells_[static_cast<size_t>(cx) + static_cast<size_t>(nx_) * (cy + static_cast<size_t>(ny_) * cz)];
        for (const auto& [p, id] : cell) scratch_.push_back({squared_distance(p, q), id});
    }
    void visit_ring(int cx, int cy, int cz, int r, const Point3& q) const {
        if (r == 0) {
            scan_cell(cx, cy, cz, q);
            return;
        }
        for (int s : {-r, r})
            for (int dy = -r; dy <= r; ++dy)
                for (int dz = -r; dz <= r; ++dz) scan_cell(cx + s, cy + dy, cz + dz, q);
        for (int s : {-r, r})
            for (int dx = -r + 1; dx <= r - 1; ++dx)
                for (int dz = -r; dz <= r; ++dz) scan_cell(cx + dx, cy + s, cz + dz, q);
        for (int s : {-r, r})
            for (int dx = -r + 1; dx <= r - 1; ++dx)
                for (int dy = -r + 1; dy <= r - 1; ++dy) scan_cell(cx + dx, cy + dy, cz + s, q);
    }

    Aabb bounds_;
    double cell_ = 1.0;
    int nx_ = 1, ny_ = 1, nz_ = 1;
    int count_ = 0;
    std::vector<std::vector<std::pair<Point3, int>>> cells_;
    mutable std::vector<std::pair<double, int>> scratch_;
};

}  // namespace bplan

#include "openobj/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace openobj {

PointCloud concat_clouds(const std::vector<const PointCloud*>& clouds) {
    int64_t n = 0;
    bool all_colored = true;
    for (const auto* c : clouds) {
        n += c->size();
        all_colored = all_colored && c->has_colors();
    }
    PointCloud out;
    out.points.resize(n, 3);
    if (all_colored && n > 0) out.colors.resize(n, 3);
    int64_t row = 0;
    for (const auto* c : clouds) {
        out.points.middleRows(row, c->size()) = c->points;
        if (all_colored && c->size() > 0) out.colors.middleRows(row, c->size()) = c->colors;
        row += c->size();
    }
    return out;
}

PointCloud subsample_cloud(const PointCloud& c, int64_t max_points) {
    if (c.size() <= max_points) return c;
    PointCloud out;
    out.points.resize(max_points, 3);
    if (c.has_colors()) out.colors.resize(max_points, 3);
    for (int64_t i = 0; i < max_points; ++i) {
        int64_t src = i * c.size() / max_points;
        out.points.row(i) = c.points.row(src);
        if (c.has_colors()) out.colors.row(i) = c.colors.row(src);
    }
    return out;
}

Bbox3 trimmed_bbox(const PointCloud& cloud, double trim_quantile) {
    if (cloud.empty()) throw std::invalid_argument("trimmed_bbox: empty cloud");
    if (trim_quantile < 0.0 || trim_quantile >= 0.5)
        throw std::invalid_argument("trimmed_bbox: quantile must be in [0, 0.5)");
    const int64_t n = cloud.size();
    Bbox3 box;
    std::vector<double> axis(static_cast<size_t>(n));
    for (int a = 0; a < 3; ++a) {
        for (int64_t i = 0; i < n; ++i) axis[size_t(i)] = cloud.points(i, a);
        std::sort(axis.begin(), axis.end());
        // nearest-rank quantile, symmetric trim
        int64_t lo = int64_t(std::floor(trim_quantile * double(n - 1)));
        int64_t hi = int64_t(std::ceil((1.0 - trim_quantile) * double(n - 1)));
        box.min[a] = axis[size_t(lo)];
        box.max[a] = axis[size_t(hi)];
    }
    return box;
}

double bbox_iou_3d(const Bbox3& a, const Bbox3& b) {
    const double va = a.volume();
    const double vb = b.volume();
    if (va <= 0.0 || vb <= 0.0) {
        bool identical = (a.min - b.min).norm() == 0.0 && (a.max - b.max).norm() == 0.0;
        return identical ? 1.0 : 0.0;
    }
    Eigen::Vector3d lo = a.min.cwiseMax(b.min);
    Eigen::Vector3d hi = a.max.cwiseMin(b.max);
    double inter = ((hi - lo).cwiseMax(0.0)).prod();
    double uni = va + vb - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::array<int64_t, 3> VoxelHashGrid::cell_of(const Eigen::Vector3d& p) const {
    return {int64_t(std::floor(p.x() / cell_)), int64_t(std::floor(p.y() / cell_)),
            int64_t(std::floor(p.z() / cell_))};
}

VoxelHashGrid::VoxelHashGrid(const PointCloud& cloud, double cell_size)
    : cell_(cell_size), cloud_(cloud) {
    if (cell_size <= 0.0) throw std::invalid_argument("VoxelHashGrid: cell_size <= 0");
    for (int64_t i = 0; i < cloud.size(); ++i)
        cells_[cell_of(cloud.points.row(i))].push_back(i);
}

bool VoxelHashGrid::has_neighbor_within(const Eigen::Vector3d& q, double radius) const {
    const double r2 = radius * radius;
    auto c = cell_of(q);
    for (int64_t dx = -1; dx <= 1; ++dx)
        for (int64_t dy = -1; dy <= 1; ++dy)
            for (int64_t dz = -1; dz <= 1; ++dz) {
                auto it = cells_.find({c[0] + dx, c[1] + dy, c[2] + dz});
                if (it == cells_.end()) continue;
                for (int64_t i : it->second) {
                    if ((cloud_.points.row(i).transpose() - q).squaredNorm() < r2)
                        return true;
                }
            }
    return false;
}

double coverage_rate(const PointCloud& a, const PointCloud& b, double theta_dist) {
    if (a.empty() || b.empty()) throw std::invalid_argument("coverage_rate: empty cloud");
    const PointCloud& small = a.size() <= b.size() ? a : b;
    const PointCloud& large = a.size() <= b.size() ? b : a;
    VoxelHashGrid grid(large, theta_dist);
    int64_t matched = 0;
    for (int64_t i = 0; i < small.size(); ++i)
        if (grid.has_neighbor_within(small.points.row(i), theta_dist)) ++matched;
    return double(matched) / double(small.size());
}

}  // namespace openobj

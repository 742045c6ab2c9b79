#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace openobj {

// World-space point cloud, row per point, optional per-point RGB in [0,1].
struct PointCloud {
    Eigen::Matrix<double, Eigen::Dynamic, 3> points;
    Eigen::Matrix<double, Eigen::Dynamic, 3> colors;  // empty when absent

    int64_t size() const { return points.rows(); }
    bool empty() const { return points.rows() == 0; }
    bool has_colors() const { return colors.rows() == points.rows() && points.rows() > 0; }
};

PointCloud concat_clouds(const std::vector<const PointCloud*>& clouds);

// Deterministic subsample to at most max_points (evenly strided).
PointCloud subsample_cloud(const PointCloud& c, int64_t max_points);

struct Bbox3 {
    Eigen::Vector3d min = Eigen::Vector3d::Zero();
    Eigen::Vector3d max = Eigen::Vector3d::Zero();

    double volume() const { return ((max - min).cwiseMax(0.0)).prod(); }
    Eigen::Vector3d center() const { return 0.5 * (min + max); }
    bool contains(const Eigen::Vector3d& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
    Bbox3 expanded(double frac) const {
        Eigen::Vector3d h = 0.5 * frac * (max - min);
        return {min - h, max + h};
    }
};

// Per-axis [q, 1-q] quantile bounds; q in [0, 0.5).
Bbox3 trimmed_bbox(const PointCloud& cloud, double trim_quantile = 0.02);

// volume(a ∩ b) / volume(a ∪ b); identical degenerate boxes give 1, other
// zero-volume cases give 0.
double bbox_iou_3d(const Bbox3& a, const Bbox3& b);

// Uniform-voxel spatial hash over a fixed point set; exact radius queries by
// scanning the 27 cells around the query point.
class VoxelHashGrid {
public:
    VoxelHashGrid(const PointCloud& cloud, double cell_size);

    // True iff some stored point lies strictly within `radius` of q
    // (radius must be <= cell size for the 27-cell scan to be exact).
    bool has_neighbor_within(const Eigen::Vector3d& q, double radius) const;

private:
    struct CellHash {
        size_t operator()(const std::array<int64_t, 3>& c) const {
            uint64_t h = 1469598103934665603ull;
            for (int64_t v : c) {
                h ^= uint64_t(v);
                h *= 1099511628211ull;
            }
            return size_t(h);
        }
    };
    double cell_;
    const PointCloud& cloud_;
    std::unordered_map<std::array<int64_t, 3>, std::vector<int64_t>, CellHash> cells_;
    std::array<int64_t, 3> cell_of(const Eigen::Vector3d& p) const;
};

// Fraction of the smaller cloud whose nearest neighbor in the other cloud is
// closer than theta_dist.
double coverage_rate(const PointCloud& a, const PointCloud& b, double theta_dist);

}  // namespace openobj

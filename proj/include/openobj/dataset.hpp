#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "openobj/geometry.hpp"
#include "openobj/tensor.hpp"

namespace openobj {

struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Intrinsics {
    double fx = 0, fy = 0, cx = 0, cy = 0;
};

enum class MaskKind { Instance, Part };

// One binary mask with its embeddings, as stored in the dataset.
struct MaskRecord {
    int frame_id = 0;
    int mask_index = 0;
    MaskKind kind = MaskKind::Instance;
    int height = 0, width = 0;
    std::vector<uint8_t> mask;          // H*W, row-major, values in {0,1}
    Eigen::VectorXf clip_embedding;     // unit norm, dim D_e
    Eigen::VectorXf caption_embedding;  // unit norm, dim D_c
    std::string caption;
    std::optional<int> gt_object_id;  // synthetic scenes only

    bool at(int v, int u) const { return mask[size_t(v) * size_t(width) + size_t(u)] != 0; }
    int64_t pixel_count() const;
};

// One posed RGB-D observation. Color in [0,1] per channel, depth in meters
// with 0 marking invalid pixels. Pose is camera-to-world; camera frame is
// x-right, y-down, z-forward.
struct FrameRecord {
    int frame_id = 0;
    int height = 0, width = 0;
    std::vector<float> color;  // H*W*3
    std::vector<float> depth;  // H*W
    Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();
    Intrinsics intrinsics;
    std::vector<MaskRecord> masks;

    float depth_at(int v, int u) const { return depth[size_t(v) * size_t(width) + size_t(u)]; }
    Eigen::Vector3f color_at(int v, int u) const {
        size_t i = (size_t(v) * size_t(width) + size_t(u)) * 3;
        return {color[i], color[i + 1], color[i + 2]};
    }
};

// Checks the rotation block of a camera-to-world pose: orthonormal within
// tol and determinant +1.
void validate_pose(const Eigen::Matrix4d& pose, double tol = 1e-6);

// Back-projects masked pixels with valid depth into world space.
PointCloud backproject_mask(const std::vector<uint8_t>& mask, const std::vector<float>& depth,
                            int height, int width, const Intrinsics& K,
                            const Eigen::Matrix4d& pose,
                            const std::vector<float>* color = nullptr);

// Projects a world point into pixel coordinates; returns (u, v, depth).
Eigen::Vector3d project_point(const Eigen::Vector3d& world, const Intrinsics& K,
                              const Eigen::Matrix4d& pose);

// Dataset handle over a manifest directory. Frames are loaded eagerly in
// frame order; the handle is immutable after construction.
class Dataset {
public:
    static Dataset load(const std::filesystem::path& dir);

    const std::filesystem::path& root() const { return root_; }
    int height() const { return height_; }
    int width() const { return width_; }
    int embed_dim() const { return d_e_; }
    int caption_dim() const { return d_c_; }
    double depth_scale() const { return depth_scale_; }

    size_t frame_count() const { return frames_.size(); }
    const FrameRecord& frame(size_t i) const { return frames_.at(i); }
    const std::vector<FrameRecord>& frames() const { return frames_; }

    // Flat index over instance masks across all frames, in frame order.
    struct MaskRef {
        int frame = 0;   // index into frames()
        int mask = 0;    // index into frame.masks
    };
    const std::vector<MaskRef>& instance_masks() const { return instance_masks_; }
    const MaskRecord& mask(const MaskRef& r) const { return frames_[size_t(r.frame)].masks[size_t(r.mask)]; }

private:
    std::filesystem::path root_;
    int height_ = 0, width_ = 0, d_e_ = 0, d_c_ = 0;
    double depth_scale_ = 1.0;
    std::vector<FrameRecord> frames_;
    std::vector<MaskRef> instance_masks_;
};

}  // namespace openobj

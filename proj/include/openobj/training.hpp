#pragma once

#include <memory>
#include <optional>
#include <unordered_map>

#include "openobj/clustering.hpp"
#include "openobj/field.hpp"
#include "openobj/part_features.hpp"
#include "openobj/render.hpp"

namespace openobj {

// Lazily composited per-frame feature images, keyed by frame index.
class FeatureImageCache {
public:
    FeatureImageCache(const Dataset& ds) : ds_(ds) {}
    // Not thread-safe; call ensure() for all frames before parallel reads.
    const FeatureImage& get(int frame_index);
    void ensure(const std::vector<int>& frame_indices);

private:
    const Dataset& ds_;
    std::unordered_map<int, FeatureImage> cache_;
};

// Greedy max-min spacing over camera translations among frames where the
// object's mask area exceeds min_pixels (all observing frames when none
// pass the floor). Throws when the object is never observed.
std::vector<int> select_keyframes(const ObjectInstance& obj, const Dataset& ds, int n_keyframes,
                                  int min_pixels = 64);

struct TrainConfig {
    int steps = 2000;
    int rays_per_object = 32;
    SampleConfig sampling;
    AdamConfig adam;
    LossWeights loss;
    FieldConfig arch;  // feat_dim is overridden by the dataset's D_e
    int n_keyframes = 12;
    int keyframe_min_pixels = 64;
    double domain_expand = 0.4;  // fractional bbox expansion of the field domain
    uint64_t seed = 0;
    int threads = 1;
};

struct ObjectSupervision {
    struct Keyframe {
        int frame_index = 0;
        std::vector<uint8_t> mask;  // union of the object's masks in the frame
        int u_min = 0, u_max = 0, v_min = 0, v_max = 0;  // 2D bbox of the mask
        double median_depth = 0.0;                        // fallback surface depth
    };
    std::vector<Keyframe> keyframes;
};

ObjectSupervision build_supervision(const ObjectInstance& obj, const Dataset& ds,
                                    const TrainConfig& cfg);

struct TrainResult {
    std::vector<FieldNetwork> fields;                // one per object
    std::vector<std::vector<LossBreakdown>> curves;  // per object, per step
};

// Trains one field per object. Each object owns an RNG seeded from
// (seed, object id), so results are identical under any thread count.
TrainResult train_objects(const std::vector<ObjectInstance>& objects, const Dataset& ds,
                          FeatureImageCache& features, const TrainConfig& cfg);

// Rendering error against the supervision targets, sampled on keyframes.
struct ObjectEvalMetrics {
    double depth_mae = 0.0;
    double color_mae = 0.0;
    double feat_cosine = 0.0;  // mean cosine to the composited feature targets
    int64_t depth_count = 0, color_count = 0, feat_count = 0;
};

ObjectEvalMetrics evaluate_object(const FieldNetwork& net, const ObjectInstance& obj,
                                  const Dataset& ds, FeatureImageCache& features,
                                  const TrainConfig& cfg, int64_t max_pixels, uint64_t seed);

// Novel-view rendering: per pixel, each object whose domain the ray crosses
// is rendered with stratified midpoint samples; the nearest object with
// rendered occupancy > 0.5 wins the pixel.
struct RenderedImage {
    int height = 0, width = 0, feat_dim = 0;
    std::vector<float> color;  // H*W*3
    std::vector<float> depth;  // H*W, 0 where no object
    std::vector<float> feat;   // H*W*feat_dim
    std::vector<int> object;   // H*W, -1 where none
};

RenderedImage render_view(const std::vector<FieldNetwork>& fields, const Intrinsics& K,
                          const Eigen::Matrix4d& pose, int height, int width,
                          int samples_per_ray = 32, int threads = 1);

std::optional<std::pair<double, double>> intersect_ray_bbox(const Eigen::Vector3d& origin,
                                                            const Eigen::Vector3d& dir,
                                                            const Bbox3& box);

}  // namespace openobj

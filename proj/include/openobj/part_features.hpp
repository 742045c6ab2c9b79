#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "openobj/dataset.hpp"

namespace openobj {

// Dense per-pixel part feature image: covered pixels hold the arithmetic
// mean of the covering part masks' embeddings, uncovered pixels are zero.
struct FeatureImage {
    int height = 0, width = 0, dim = 0;
    std::vector<float> features;   // H*W*dim
    std::vector<uint8_t> coverage; // H*W, 1 where >=1 part mask covers

    Eigen::Map<const Eigen::VectorXf> at(int v, int u) const {
        return {features.data() + (size_t(v) * size_t(width) + size_t(u)) * size_t(dim),
                dim};
    }
    bool covered(int v, int u) const {
        return coverage[size_t(v) * size_t(width) + size_t(u)] != 0;
    }
};

struct PartMaskView {
    const std::vector<uint8_t>* mask = nullptr;  // H*W
    const Eigen::VectorXf* embedding = nullptr;  // dim D_e
};

FeatureImage composite_feature_image(const std::vector<PartMaskView>& parts, int height,
                                     int width, int dim);

// Compositing over the part masks of one dataset frame.
FeatureImage composite_frame_features(const FrameRecord& frame, int dim);

struct FeatureTarget {
    Eigen::VectorXf value;
    bool valid = false;
};

// Supervision lookup; valid iff the pixel is covered. Throws out_of_range on
// out-of-bounds pixels.
FeatureTarget feature_target(const FeatureImage& img, int v, int u);

}  // namespace openobj

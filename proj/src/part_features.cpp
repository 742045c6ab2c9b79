#include "openobj/part_features.hpp"

#include <stdexcept>

namespace openobj {

FeatureImage composite_feature_image(const std::vector<PartMaskView>& parts, int height,
                                     int width, int dim) {
    const size_t npx = size_t(height) * size_t(width);
    FeatureImage img;
    img.height = height;
    img.width = width;
    img.dim = dim;
    img.features.assign(npx * size_t(dim), 0.0f);
    img.coverage.assign(npx, 0);

    std::vector<uint32_t> counts(npx, 0);
    for (const auto& p : parts) {
        if (p.mask->size() != npx)
            throw std::invalid_argument("composite_feature_image: mask shape mismatch");
        if (p.embedding->size() != dim)
            throw std::invalid_argument("composite_feature_image: embedding dim mismatch");
        const float* e = p.embedding->data();
        for (size_t i = 0; i < npx; ++i) {
            if (!(*p.mask)[i]) continue;
            float* dst = img.features.data() + i * size_t(dim);
            for (int d = 0; d < dim; ++d) dst[d] += e[d];
            ++counts[i];
        }
    }
    for (size_t i = 0; i < npx; ++i) {
        if (counts[i] == 0) continue;
        img.coverage[i] = 1;
        float inv = 1.0f / float(counts[i]);
        float* dst = img.features.data() + i * size_t(dim);
        for (int d = 0; d < dim; ++d) dst[d] *= inv;
    }
    return img;
}

FeatureImage composite_frame_features(const FrameRecord& frame, int dim) {
    std::vector<PartMaskView> parts;
    for (const auto& m : frame.masks)
        if (m.kind == MaskKind::Part) parts.push_back({&m.mask, &m.clip_embedding});
    return composite_feature_image(parts, frame.height, frame.width, dim);
}

FeatureTarget feature_target(const FeatureImage& img, int v, int u) {
    if (v < 0 || u < 0 || v >= img.height || u >= img.width)
        throw std::out_of_range("feature_target: pixel out of bounds");
    FeatureTarget t;
    t.value = img.at(v, u);
    t.valid = img.covered(v, u);
    return t;
}

}  // namespace openobj

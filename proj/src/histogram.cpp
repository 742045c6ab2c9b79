#include "openobj/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace openobj {

Eigen::VectorXd compute_color_histogram(const std::vector<float>& color,
                                        const std::vector<uint8_t>& mask, int height, int width) {
    const size_t npx = size_t(height) * size_t(width);
    if (mask.size() != npx || color.size() != npx * 3)
        throw std::invalid_argument("compute_color_histogram: shape mismatch");
    Eigen::VectorXd h = Eigen::VectorXd::Zero(96);
    int64_t count = 0;
    for (size_t i = 0; i < npx; ++i) {
        if (!mask[i]) continue;
        ++count;
        for (int ch = 0; ch < 3; ++ch) {
            int value = std::clamp(int(color[i * 3 + size_t(ch)] * 255.0f + 0.5f), 0, 255);
            h[ch * 32 + value / 8] += 1.0;
        }
    }
    if (count == 0) throw std::invalid_argument("compute_color_histogram: empty mask");
    h.normalize();
    return h;
}

}  // namespace openobj

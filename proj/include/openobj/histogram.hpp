#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace openobj {

// 96-bin color histogram: 32 uniform bins per channel over [0,256),
// concatenated R|G|B, L2-normalized. Color input is float in [0,1].
Eigen::VectorXd compute_color_histogram(const std::vector<float>& color,
                                        const std::vector<uint8_t>& mask, int height, int width);

}  // namespace openobj

#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "openobj/dataset.hpp"

namespace openobj {

struct SampleConfig {
    int n_uniform = 10;   // stratified samples on [t_near, t_surface]
    int n_surface = 6;    // Gaussian samples around t_surface
    double t_near = 0.05;
    double sigma_s = 0.03;
};

// One pixel's ray with its merged, ascending sample depths.
struct RaySampleBatch {
    int u = 0, v = 0;
    Eigen::Vector3d origin;
    Eigen::Vector3d direction;  // camera z-component 1, so depth == parameter
    double t_surface = 0.0;
    std::vector<double> depths;
    Eigen::Matrix<double, Eigen::Dynamic, 3> points;
};

// Stratified-uniform depths on [t_near, t_surface] plus truncated Gaussian
// depths around t_surface; merged and sorted ascending.
RaySampleBatch sample_ray(int u, int v, double surface_depth, const Intrinsics& K,
                          const Eigen::Matrix4d& pose, const SampleConfig& cfg,
                          std::mt19937_64& rng);

struct RenderedPixel {
    double occ = 0.0;
    double depth = 0.0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    Eigen::VectorXd feat;
    Eigen::VectorXd weights;  // termination probabilities T_m
};

// Occupancy compositing: T_m = o_m * prod_{n<m}(1 - o_n);
// occ = sum T_m, depth = sum T_m d_m, color/feat likewise.
RenderedPixel render_ray(const Eigen::VectorXd& occ, const Eigen::MatrixXd& color,
                         const Eigen::MatrixXd& feat, const Eigen::VectorXd& depths);

// Reverse-mode derivatives of render_ray: given dL w.r.t. the rendered
// occupancy/depth/color/feature, produces dL w.r.t. the per-sample inputs.
struct RayGradients {
    Eigen::VectorXd d_occ;
    Eigen::MatrixXd d_color;
    Eigen::MatrixXd d_feat;
};
RayGradients render_ray_backward(const Eigen::VectorXd& occ, const Eigen::MatrixXd& color,
                                 const Eigen::MatrixXd& feat, const Eigen::VectorXd& depths,
                                 const RenderedPixel& rendered, double d_out_occ,
                                 double d_out_depth, const Eigen::Vector3d& d_out_color,
                                 const Eigen::VectorXd& d_out_feat);

struct LossWeights {
    double occ = 1.0;
    double depth = 0.2;
    double color = 1.0;
    double feat = 1.0;
};

// Supervision for one sampled pixel. Pixels outside the object mask only
// contribute the occupancy term (target 0).
struct PixelTarget {
    bool in_mask = false;
    bool depth_valid = false;
    bool feat_valid = false;
    double depth = 0.0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    Eigen::VectorXd feat;
};

struct LossBreakdown {
    double occ = 0.0, depth = 0.0, color = 0.0, feat = 0.0, total = 0.0;
    int64_t pixels = 0, masked = 0;
    int64_t empty_term_warnings = 0;  // loss terms with no contributing pixel
};

// Mean-absolute-error losses: occupancy over all sampled pixels against the
// mask indicator; depth/color/feature restricted to in-mask pixels with valid
// targets. Vector residuals are averaged over their components.
LossBreakdown compute_losses(const std::vector<RenderedPixel>& rendered,
                             const std::vector<PixelTarget>& targets, const LossWeights& w);

// d(total loss)/d(rendered outputs) for every pixel, matching compute_losses.
struct PixelGradients {
    double d_occ = 0.0;
    double d_depth = 0.0;
    Eigen::Vector3d d_color = Eigen::Vector3d::Zero();
    Eigen::VectorXd d_feat;
};
std::vector<PixelGradients> loss_gradients(const std::vector<RenderedPixel>& rendered,
                                           const std::vector<PixelTarget>& targets,
                                           const LossWeights& w);

}  // namespace openobj

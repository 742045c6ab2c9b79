#pragma once

#include <Eigen/Dense>
#include <vector>

#include "openobj/dataset.hpp"
#include "openobj/geometry.hpp"

namespace openobj {

// Per-mask geometry and appearance used by the pairwise similarity matrix.
struct MaskDescriptor {
    Dataset::MaskRef ref;
    PointCloud cloud;           // world space, subsampled
    Bbox3 bbox;                 // trimmed
    Eigen::VectorXd histogram;  // 96-dim, unit L2
    Eigen::VectorXf clip;
    Eigen::VectorXf cap;
};

struct SimilarityConfig {
    double w_geo = 0.25;
    double w_pho = 0.25;
    double w_clip = 0.25;
    double w_cap = 0.25;
    double theta_mask = 0.6;

    void validate() const;
};

struct WeightedEdge {
    int a = 0, b = 0;
    double weight = 0.0;
};

struct MaskGraph {
    int node_count = 0;
    std::vector<WeightedEdge> edges;  // a < b, weight > theta_mask
};

struct DescriptorOptions {
    double trim_quantile = 0.02;
    int64_t max_points = 4096;
    int threads = 1;
};

// Builds descriptors for every instance mask of the dataset, in instance_masks() order.
std::vector<MaskDescriptor> compute_descriptors(const Dataset& ds,
                                                const DescriptorOptions& opt = {});

// Dense N x N similarity matrix: convex combination of geometry,
// color-histogram, clip and caption similarities; symmetric, unit diagonal,
// cosine terms clamped to [0, 1].
Eigen::MatrixXd assemble_similarity(const SimilarityConfig& cfg,
                                    const std::vector<MaskDescriptor>& descriptors,
                                    int threads = 1);

MaskGraph build_mask_graph(const Eigen::MatrixXd& S, double theta_mask);

}  // namespace openobj

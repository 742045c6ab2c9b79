#pragma once

#include <cstdint>
#include <vector>

#include "openobj/louvain.hpp"
#include "openobj/mask_graph.hpp"

namespace openobj {

struct Cluster {
    std::vector<int> members;   // descriptor indices, ascending
    PointCloud cloud;           // merged member clouds, subsampled
    Eigen::VectorXd histogram;  // unit-L2 mean of member histograms
};

struct ClusterSet {
    std::vector<Cluster> clusters;
};

struct FineConfig {
    double theta_dist = 0.03;  // meters
    double theta_pc = 0.5;
    double theta_pho = 0.7;

    void validate() const;
};

// Per-object clustering result: member mask refs plus merged geometry.
struct ObjectInstance {
    int id = 0;
    std::vector<int> member_indices;          // indices into the descriptor list
    std::vector<Dataset::MaskRef> members;    // same order
    PointCloud cloud;
    Eigen::VectorXd histogram;
    Bbox3 bbox;
};

ClusterSet clusters_from_partition(const std::vector<MaskDescriptor>& descriptors,
                                   const std::vector<int>& community);

// Fuses cluster pairs whose matched-point coverage exceeds theta_pc and whose
// histogram inner product exceeds theta_pho. Single pass over pairs in
// descending coverage order, unions applied transitively via disjoint-set;
// merged clouds and histograms recomputed once at the end. Idempotent.
ClusterSet fine_merge(const std::vector<MaskDescriptor>& descriptors, const ClusterSet& coarse,
                      const FineConfig& cfg, int threads = 1);

// Drops clusters with fewer than ceil(n_total/500) members.
ClusterSet filter_outliers(const ClusterSet& set, int64_t n_total);

// Full two-stage clustering: similarity -> graph -> Louvain -> fine merge ->
// outlier filter. Optionally exposes the similarity matrix for debugging.
std::vector<ObjectInstance> cluster_pipeline(const Dataset& ds,
                                             const std::vector<MaskDescriptor>& descriptors,
                                             const SimilarityConfig& sim_cfg,
                                             const FineConfig& fine_cfg, uint64_t seed,
                                             int threads = 1,
                                             Eigen::MatrixXd* similarity_out = nullptr);

}  // namespace openobj

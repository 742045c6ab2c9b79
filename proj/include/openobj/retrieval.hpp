#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "openobj/clustering.hpp"
#include "openobj/dataset.hpp"

namespace openobj {

struct ObjectSummary {
    int object_id = 0;
    Eigen::VectorXd clip;  // unit norm
    Eigen::VectorXd cap;   // unit norm
    int member_count = 0;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
};

// Largest cluster under single-linkage agglomeration with cosine-distance
// cutoff tau; ties go to the cluster containing the lowest member index.
// Returns the L2-normalized mean of that cluster.
Eigen::VectorXd robust_mean_embedding(const std::vector<Eigen::VectorXd>& members, double tau);

ObjectSummary aggregate_object_summary(const ObjectInstance& obj, const Dataset& ds,
                                       double tau_agg = 0.15);

struct QueryResult {
    std::vector<std::pair<int, double>> ranking;  // (object id, score), descending
};

// score(O_k) = max over the provided query halves of the cosine against the
// matching summary embedding; ties broken by ascending object id.
QueryResult query_objects(const std::optional<Eigen::VectorXd>& q_clip,
                          const std::optional<Eigen::VectorXd>& q_cap,
                          const std::vector<ObjectSummary>& summaries);

struct PartQueryResult {
    Eigen::VectorXd scores;  // per surface point
    int argmax = 0;
    Eigen::Vector3d argmax_point = Eigen::Vector3d::Zero();
};

// Per-point cosine between the query and each surface point's feature.
PartQueryResult query_part(const Eigen::VectorXd& query,
                           const Eigen::Matrix<double, Eigen::Dynamic, 3>& surface_points,
                           const Eigen::MatrixXd& surface_features);

// Argmax-cosine label per element; elements whose best score falls below
// score_floor get -1 ("unlabeled"). Label ties go to the lower label index.
std::vector<int> semantic_segment(const Eigen::MatrixXd& element_features,
                                  const std::vector<Eigen::VectorXd>& label_embeddings,
                                  double score_floor = -std::numeric_limits<double>::infinity());

// Macro-averaged over classes present in GT; pred label -1 never matches.
std::pair<double, double> compute_miou_macc(const std::vector<int>& pred,
                                            const std::vector<int>& gt, int class_count);

int recall_at_k(const QueryResult& result, int gt_object_id, int k);

}  // namespace openobj

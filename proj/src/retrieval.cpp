#include "openobj/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace openobj {

namespace {

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double denom = a.norm() * b.norm();
    return denom > 0 ? a.dot(b) / denom : 0.0;
}

}  // namespace

Eigen::VectorXd robust_mean_embedding(const std::vector<Eigen::VectorXd>& members, double tau) {
    if (members.empty()) throw std::invalid_argument("robust_mean_embedding: empty member set");
    const size_t n = members.size();

    // Cutting a single-linkage dendrogram at height tau yields the connected
    // components of the graph with edges where cosine distance <= tau.
    std::vector<int> comp(n, -1);
    int n_comp = 0;
    for (size_t i = 0; i < n; ++i) {
        if (comp[i] >= 0) continue;
        std::vector<size_t> stack{i};
        comp[i] = n_comp;
        while (!stack.empty()) {
            size_t u = stack.back();
            stack.pop_back();
            for (size_t v = 0; v < n; ++v) {
                if (comp[v] >= 0) continue;
                if (1.0 - cosine(members[u], members[v]) <= tau) {
                    comp[v] = n_comp;
                    stack.push_back(v);
                }
            }
        }
        ++n_comp;
    }

    std::vector<int> sizes(size_t(n_comp), 0);
    for (int c : comp) ++sizes[size_t(c)];
    // Components are numbered by their lowest member, so the first component
    // with maximal size realizes the lowest-index tie rule.
    int best = 0;
    for (int c = 1; c < n_comp; ++c)
        if (sizes[size_t(c)] > sizes[size_t(best)]) best = c;

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(members[0].size());
    for (size_t i = 0; i < n; ++i)
        if (comp[i] == best) mean += members[i];
    mean /= double(sizes[size_t(best)]);
    double norm = mean.norm();
    if (norm > 0) mean /= norm;
    return mean;
}

ObjectSummary aggregate_object_summary(const ObjectInstance& obj, const Dataset& ds,
                                       double tau_agg) {
    if (obj.members.empty())
        throw std::invalid_argument("aggregate_object_summary: object has no members");
    std::vector<Eigen::VectorXd> clips, caps;
    for (const auto& ref : obj.members) {
        const MaskRecord& m = ds.mask(ref);
        clips.push_back(m.clip_embedding.cast<double>());
        caps.push_back(m.caption_embedding.cast<double>());
    }
    ObjectSummary s;
    s.object_id = obj.id;
    s.member_count = int(obj.members.size());
    s.clip = robust_mean_embedding(clips, tau_agg);
    s.cap = robust_mean_embedding(caps, tau_agg);
    if (!obj.cloud.empty()) s.centroid = obj.cloud.points.colwise().mean().transpose();
    return s;
}

QueryResult query_objects(const std::optional<Eigen::VectorXd>& q_clip,
                          const std::optional<Eigen::VectorXd>& q_cap,
                          const std::vector<ObjectSummary>& summaries) {
    if (!q_clip && !q_cap) throw std::invalid_argument("query_objects: no query embedding given");
    QueryResult r;
    for (const auto& s : summaries) {
        double score = -std::numeric_limits<double>::infinity();
        if (q_clip) {
            if (q_clip->size() != s.clip.size())
                throw std::invalid_argument("query_objects: clip dim mismatch");
            score = std::max(score, cosine(*q_clip, s.clip));
        }
        if (q_cap) {
            if (q_cap->size() != s.cap.size())
                throw std::invalid_argument("query_objects: caption dim mismatch");
            score = std::max(score, cosine(*q_cap, s.cap));
        }
        r.ranking.push_back({s.object_id, score});
    }
    std::sort(r.ranking.begin(), r.ranking.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return r;
}

PartQueryResult query_part(const Eigen::VectorXd& query,
                           const Eigen::Matrix<double, Eigen::Dynamic, 3>& surface_points,
                           const Eigen::MatrixXd& surface_features) {
    if (surface_points.rows() == 0) throw std::invalid_argument("query_part: empty surface");
    if (surface_points.rows() != surface_features.rows())
        throw std::invalid_argument("query_part: point/feature count mismatch");
    if (query.size() != surface_features.cols())
        throw std::invalid_argument("query_part: embedding dim mismatch");

    PartQueryResult r;
    r.scores.resize(surface_points.rows());
    for (int64_t i = 0; i < surface_points.rows(); ++i)
        r.scores[i] = cosine(query, surface_features.row(i).transpose());
    r.scores.maxCoeff(&r.argmax);
    r.argmax_point = surface_points.row(r.argmax).transpose();
    return r;
}

std::vector<int> semantic_segment(const Eigen::MatrixXd& element_features,
                                  const std::vector<Eigen::VectorXd>& label_embeddings,
                                  double score_floor) {
    if (label_embeddings.empty()) throw std::invalid_argument("semantic_segment: no labels");
    std::vector<int> out(size_t(element_features.rows()), -1);
    for (int64_t i = 0; i < element_features.rows(); ++i) {
        Eigen::VectorXd f = element_features.row(i).transpose();
        double best = -std::numeric_limits<double>::infinity();
        int label = -1;
        for (size_t l = 0; l < label_embeddings.size(); ++l) {
            double s = cosine(f, label_embeddings[l]);
            if (s > best) {
                best = s;
                label = int(l);
            }
        }
        out[size_t(i)] = best >= score_floor ? label : -1;
    }
    return out;
}

std::pair<double, double> compute_miou_macc(const std::vector<int>& pred,
                                            const std::vector<int>& gt, int class_count) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("compute_miou_macc: length mismatch");
    std::vector<int64_t> tp(size_t(class_count), 0), fp(size_t(class_count), 0),
        fn(size_t(class_count), 0);
    std::vector<bool> present(size_t(class_count), false);
    for (size_t i = 0; i < gt.size(); ++i) {
        int g = gt[i], p = pred[i];
        if (g < 0 || g >= class_count) throw std::out_of_range("compute_miou_macc: gt label");
        present[size_t(g)] = true;
        if (p == g) {
            ++tp[size_t(g)];
        } else {
            ++fn[size_t(g)];
            if (p >= 0 && p < class_count) ++fp[size_t(p)];
        }
    }
    double iou_sum = 0.0, acc_sum = 0.0;
    int n_present = 0;
    for (int c = 0; c < class_count; ++c) {
        if (!present[size_t(c)]) continue;
        ++n_present;
        int64_t denom_iou = tp[size_t(c)] + fp[size_t(c)] + fn[size_t(c)];
        int64_t denom_acc = tp[size_t(c)] + fn[size_t(c)];
        iou_sum += denom_iou ? double(tp[size_t(c)]) / double(denom_iou) : 0.0;
        acc_sum += denom_acc ? double(tp[size_t(c)]) / double(denom_acc) : 0.0;
    }
    return {iou_sum / n_present, acc_sum / n_present};
}

int recall_at_k(const QueryResult& result, int gt_object_id, int k) {
    if (result.ranking.empty()) throw std::invalid_argument("recall_at_k: empty ranking");
    int limit = std::min<int>(k, int(result.ranking.size()));
    for (int i = 0; i < limit; ++i)
        if (result.ranking[size_t(i)].first == gt_object_id) return 1;
    return 0;
}

}  // namespace openobj

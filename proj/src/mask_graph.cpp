#include "openobj/mask_graph.hpp"

#include <cmath>
#include <stdexcept>

#include "openobj/histogram.hpp"
#include "openobj/parallel.hpp"

namespace openobj {

void SimilarityConfig::validate() const {
    if (w_geo < 0 || w_pho < 0 || w_clip < 0 || w_cap < 0)
        throw std::invalid_argument("similarity weights must be non-negative");
    double sum = w_geo + w_pho + w_clip + w_cap;
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("similarity weights must sum to 1 (got " +
                                    std::to_string(sum) + ")");
}

std::vector<MaskDescriptor> compute_descriptors(const Dataset& ds, const DescriptorOptions& opt) {
    const auto& refs = ds.instance_masks();
    std::vector<MaskDescriptor> out(refs.size());
    parallel_for(int64_t(refs.size()), opt.threads, [&](int64_t i) {
        const auto& ref = refs[size_t(i)];
        const FrameRecord& fr = ds.frame(size_t(ref.frame));
        const MaskRecord& mr = fr.masks[size_t(ref.mask)];
        MaskDescriptor d;
        d.ref = ref;
        PointCloud full = backproject_mask(mr.mask, fr.depth, fr.height, fr.width, fr.intrinsics,
                                           fr.pose, &fr.color);
        d.cloud = subsample_cloud(full, opt.max_points);
        d.bbox = trimmed_bbox(d.cloud, opt.trim_quantile);
        d.histogram = compute_color_histogram(fr.color, mr.mask, fr.height, fr.width);
        d.clip = mr.clip_embedding;
        d.cap = mr.caption_embedding;
        out[size_t(i)] = std::move(d);
    });
    return out;
}

namespace {

double clamped_cosine(const Eigen::VectorXf& a, const Eigen::VectorXf& b) {
    double na = a.cast<double>().norm(), nb = b.cast<double>().norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    double c = a.cast<double>().dot(b.cast<double>()) / (na * nb);
    return std::clamp(c, 0.0, 1.0);
}

}  // namespace

Eigen::MatrixXd assemble_similarity(const SimilarityConfig& cfg,
                                    const std::vector<MaskDescriptor>& descriptors, int threads) {
    cfg.validate();
    const int64_t n = int64_t(descriptors.size());
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    parallel_for(n, threads, [&](int64_t i) {
        S(i, i) = 1.0;
        for (int64_t j = i + 1; j < n; ++j) {
            const MaskDescriptor& a = descriptors[size_t(i)];
            const MaskDescriptor& b = descriptors[size_t(j)];
            double s_geo = bbox_iou_3d(a.bbox, b.bbox);
            double s_pho = std::clamp(a.histogram.dot(b.histogram), 0.0, 1.0);
            double s_clip = clamped_cosine(a.clip, b.clip);
            double s_cap = clamped_cosine(a.cap, b.cap);
            S(i, j) = cfg.w_geo * s_geo + cfg.w_pho * s_pho + cfg.w_clip * s_clip +
                      cfg.w_cap * s_cap;
        }
    });
    // mirror the upper triangle
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = i + 1; j < n; ++j) S(j, i) = S(i, j);
    return S;
}

MaskGraph build_mask_graph(const Eigen::MatrixXd& S, double theta_mask) {
    if (S.rows() != S.cols()) throw std::invalid_argument("similarity matrix must be square");
    MaskGraph g;
    g.node_count = int(S.rows());
    for (int i = 0; i < g.node_count; ++i)
        for (int j = i + 1; j < g.node_count; ++j)
            if (S(i, j) > theta_mask) g.edges.push_back({i, j, S(i, j)});
    return g;
}

}  // namespace openobj

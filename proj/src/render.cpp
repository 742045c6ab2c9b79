#include "openobj/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace openobj {

RaySampleBatch sample_ray(int u, int v, double surface_depth, const Intrinsics& K,
                          const Eigen::Matrix4d& pose, const SampleConfig& cfg,
                          std::mt19937_64& rng) {
    if (!(surface_depth > cfg.t_near))
        throw std::invalid_argument("sample_ray: surface depth must exceed the near bound");
    RaySampleBatch batch;
    batch.u = u;
    batch.v = v;
    batch.t_surface = surface_depth;
    Eigen::Vector3d dir_cam((double(u) - K.cx) / K.fx, (double(v) - K.cy) / K.fy, 1.0);
    batch.origin = pose.block<3, 1>(0, 3);
    batch.direction = pose.block<3, 3>(0, 0) * dir_cam;

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double span = surface_depth - cfg.t_near;
    for (int i = 0; i < cfg.n_uniform; ++i)
        batch.depths.push_back(cfg.t_near + (double(i) + uni(rng)) * span / double(cfg.n_uniform));

    std::normal_distribution<double> gauss(surface_depth, cfg.sigma_s);
    const double hi = surface_depth + 3.0 * cfg.sigma_s;
    for (int i = 0; i < cfg.n_surface; ++i) {
        double d = gauss(rng);
        for (int tries = 0; tries < 100 && !(d > cfg.t_near && d < hi); ++tries) d = gauss(rng);
        batch.depths.push_back(std::clamp(d, cfg.t_near + 1e-9, hi));
    }

    std::sort(batch.depths.begin(), batch.depths.end());
    batch.depths.erase(std::unique(batch.depths.begin(), batch.depths.end()), batch.depths.end());

    batch.points.resize(int64_t(batch.depths.size()), 3);
    for (size_t i = 0; i < batch.depths.size(); ++i)
        batch.points.row(int64_t(i)) =
            (batch.origin + batch.depths[i] * batch.direction).transpose();
    return batch;
}

RenderedPixel render_ray(const Eigen::VectorXd& occ, const Eigen::MatrixXd& color,
                         const Eigen::MatrixXd& feat, const Eigen::VectorXd& depths) {
    const int64_t m = occ.size();
    if (color.rows() != m || feat.rows() != m || depths.size() != m)
        throw std::invalid_argument("render_ray: sample count mismatch");
    for (int64_t i = 1; i < m; ++i)
        if (depths[i] < depths[i - 1]) throw std::invalid_argument("render_ray: unsorted depths");

    RenderedPixel out;
    out.feat = Eigen::VectorXd::Zero(feat.cols());
    out.weights = Eigen::VectorXd::Zero(m);
    double transmittance = 1.0;
    for (int64_t i = 0; i < m; ++i) {
        double t = occ[i] * transmittance;
        out.weights[i] = t;
        out.occ += t;
        out.depth += t * depths[i];
        out.color += t * color.row(i).transpose();
        out.feat += t * feat.row(i).transpose();
        transmittance *= 1.0 - occ[i];
    }
    return out;
}

RayGradients render_ray_backward(const Eigen::VectorXd& occ, const Eigen::MatrixXd& color,
                                 const Eigen::MatrixXd& feat, const Eigen::VectorXd& depths,
                                 const RenderedPixel& rendered, double d_out_occ,
                                 double d_out_depth, const Eigen::Vector3d& d_out_color,
                                 const Eigen::VectorXd& d_out_feat) {
    const int64_t m = occ.size();
    RayGradients g;
    g.d_occ = Eigen::VectorXd::Zero(m);
    g.d_color = Eigen::MatrixXd::Zero(m, color.cols());
    g.d_feat = Eigen::MatrixXd::Zero(m, feat.cols());

    // upstream scalar per termination weight T_j
    Eigen::VectorXd G(m);
    for (int64_t j = 0; j < m; ++j)
        G[j] = d_out_occ + d_out_depth * depths[j] + d_out_color.dot(color.row(j)) +
               d_out_feat.dot(feat.row(j));

    // prefix transmittance A_j = prod_{n<j}(1 - o_n)
    Eigen::VectorXd A(m);
    double acc = 1.0;
    for (int64_t j = 0; j < m; ++j) {
        A[j] = acc;
        acc *= 1.0 - occ[j];
    }

    // dT_j/do_i: A_j at j == i, -o_j * prod_{n<j, n != i}(1 - o_n) for j > i.
    // The exclusion product is built incrementally, no division by (1 - o_i).
    for (int64_t i = 0; i < m; ++i) {
        double d = G[i] * A[i];
        double excl = A[i];
        for (int64_t j = i + 1; j < m; ++j) {
            d -= G[j] * occ[j] * excl;
            excl *= 1.0 - occ[j];
        }
        g.d_occ[i] = d;
        g.d_color.row(i) = rendered.weights[i] * d_out_color.transpose();
        g.d_feat.row(i) = rendered.weights[i] * d_out_feat.transpose();
    }
    return g;
}

namespace {

struct Counts {
    int64_t all = 0, depth = 0, color = 0, feat = 0;
};

Counts count_targets(const std::vector<PixelTarget>& targets) {
    Counts c;
    for (const auto& t : targets) {
        ++c.all;
        if (!t.in_mask) continue;
        ++c.color;
        if (t.depth_valid) ++c.depth;
        if (t.feat_valid) ++c.feat;
    }
    return c;
}

}  // namespace

LossBreakdown compute_losses(const std::vector<RenderedPixel>& rendered,
                             const std::vector<PixelTarget>& targets, const LossWeights& w) {
    if (rendered.size() != targets.size())
        throw std::invalid_argument("compute_losses: size mismatch");
    LossBreakdown out;
    Counts c = count_targets(targets);
    out.pixels = c.all;
    out.masked = c.color;

    for (size_t i = 0; i < rendered.size(); ++i) {
        const auto& r = rendered[i];
        const auto& t = targets[i];
        out.occ += std::abs(r.occ - (t.in_mask ? 1.0 : 0.0));
        if (!t.in_mask) continue;
        if (t.depth_valid) out.depth += std::abs(r.depth - t.depth);
        out.color += (r.color - t.color).cwiseAbs().mean();
        if (t.feat_valid) out.feat += (r.feat - t.feat).cwiseAbs().mean();
    }
    if (c.all > 0) out.occ /= double(c.all);
    if (c.depth > 0) out.depth /= double(c.depth); else { out.depth = 0; ++out.empty_term_warnings; }
    if (c.color > 0) out.color /= double(c.color); else { out.color = 0; ++out.empty_term_warnings; }
    if (c.feat > 0) out.feat /= double(c.feat); else { out.feat = 0; ++out.empty_term_warnings; }
    out.total = w.occ * out.occ + w.depth * out.depth + w.color * out.color + w.feat * out.feat;
    return out;
}

std::vector<PixelGradients> loss_gradients(const std::vector<RenderedPixel>& rendered,
                                           const std::vector<PixelTarget>& targets,
                                           const LossWeights& w) {
    if (rendered.size() != targets.size())
        throw std::invalid_argument("loss_gradients: size mismatch");
    Counts c = count_targets(targets);
    auto sgn = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };

    std::vector<PixelGradients> out(rendered.size());
    for (size_t i = 0; i < rendered.size(); ++i) {
        const auto& r = rendered[i];
        const auto& t = targets[i];
        PixelGradients& g = out[i];
        g.d_feat = Eigen::VectorXd::Zero(r.feat.size());
        if (c.all > 0) g.d_occ = w.occ * sgn(r.occ - (t.in_mask ? 1.0 : 0.0)) / double(c.all);
        if (!t.in_mask) continue;
        if (t.depth_valid && c.depth > 0)
            g.d_depth = w.depth * sgn(r.depth - t.depth) / double(c.depth);
        if (c.color > 0)
            for (int ch = 0; ch < 3; ++ch)
                g.d_color[ch] = w.color * sgn(r.color[ch] - t.color[ch]) / (3.0 * double(c.color));
        if (t.feat_valid && c.feat > 0 && r.feat.size() > 0)
            for (int64_t d = 0; d < r.feat.size(); ++d)
                g.d_feat[d] =
                    w.feat * sgn(r.feat[d] - t.feat[d]) / (double(r.feat.size()) * double(c.feat));
    }
    return out;
}

}  // namespace openobj

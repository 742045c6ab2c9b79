#include "openobj/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "openobj/parallel.hpp"

namespace openobj {

namespace {

uint64_t mix2(uint64_t a, uint64_t b) {
    uint64_t h = a * 0x9E3779B97F4A7C15ull;
    h ^= b + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h *= 0xBF58476D1CE4E5B9ull;
    return h ^ (h >> 31);
}

}  // namespace

const FeatureImage& FeatureImageCache::get(int frame_index) {
    auto it = cache_.find(frame_index);
    if (it != cache_.end()) return it->second;
    FeatureImage img = composite_frame_features(ds_.frame(size_t(frame_index)), ds_.embed_dim());
    return cache_.emplace(frame_index, std::move(img)).first->second;
}

void FeatureImageCache::ensure(const std::vector<int>& frame_indices) {
    for (int f : frame_indices) get(f);
}

namespace {

// Frames observing the object, with the union mask per frame.
std::vector<std::pair<int, std::vector<uint8_t>>> observing_frames(const ObjectInstance& obj,
                                                                   const Dataset& ds) {
    std::map<int, std::vector<uint8_t>> by_frame;
    for (const auto& ref : obj.members) {
        const MaskRecord& m = ds.mask(ref);
        auto& u = by_frame[ref.frame];
        if (u.empty()) u.assign(m.mask.size(), 0);
        for (size_t i = 0; i < m.mask.size(); ++i) u[i] |= m.mask[i];
    }
    return {by_frame.begin(), by_frame.end()};
}

}  // namespace

std::vector<int> select_keyframes(const ObjectInstance& obj, const Dataset& ds, int n_keyframes,
                                  int min_pixels) {
    auto frames = observing_frames(obj, ds);
    if (frames.empty()) throw std::invalid_argument("select_keyframes: object never observed");

    std::vector<int> candidates;
    for (const auto& [fi, mask] : frames) {
        int64_t area = 0;
        for (uint8_t m : mask) area += m != 0;
        if (area > min_pixels) candidates.push_back(fi);
    }
    if (candidates.empty())
        for (const auto& [fi, mask] : frames) candidates.push_back(fi);

    if (int(candidates.size()) <= n_keyframes) return candidates;

    std::vector<Eigen::Vector3d> pos;
    for (int fi : candidates) pos.push_back(ds.frame(size_t(fi)).pose.block<3, 1>(0, 3));
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : pos) mean += p;
    mean /= double(pos.size());

    std::vector<size_t> chosen;
    size_t first = 0;
    for (size_t i = 1; i < pos.size(); ++i)
        if ((pos[i] - mean).norm() > (pos[first] - mean).norm() + 1e-12) first = i;
    chosen.push_back(first);

    std::vector<double> min_dist(pos.size(), 1e300);
    while (int(chosen.size()) < n_keyframes) {
        for (size_t i = 0; i < pos.size(); ++i)
            min_dist[i] = std::min(min_dist[i], (pos[i] - pos[chosen.back()]).norm());
        size_t best = 0;
        double best_d = -1.0;
        for (size_t i = 0; i < pos.size(); ++i) {
            if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
            if (min_dist[i] > best_d + 1e-12) {
                best_d = min_dist[i];
                best = i;
            }
        }
        chosen.push_back(best);
    }
    std::vector<int> out;
    for (size_t i : chosen) out.push_back(candidates[i]);
    std::sort(out.begin(), out.end());
    return out;
}

ObjectSupervision build_supervision(const ObjectInstance& obj, const Dataset& ds,
                                    const TrainConfig& cfg) {
    std::vector<int> kf = select_keyframes(obj, ds, cfg.n_keyframes, cfg.keyframe_min_pixels);
    auto frames = observing_frames(obj, ds);
    std::map<int, const std::vector<uint8_t>*> union_masks;
    for (const auto& [fi, m] : frames) union_masks[fi] = &m;

    ObjectSupervision sup;
    for (int fi : kf) {
        const FrameRecord& fr = ds.frame(size_t(fi));
        ObjectSupervision::Keyframe k;
        k.frame_index = fi;
        k.mask = *union_masks.at(fi);
        k.u_min = fr.width;
        k.v_min = fr.height;
        k.u_max = -1;
        k.v_max = -1;
        std::vector<float> masked_depths;
        for (int v = 0; v < fr.height; ++v)
            for (int u = 0; u < fr.width; ++u) {
                if (!k.mask[size_t(v) * size_t(fr.width) + size_t(u)]) continue;
                k.u_min = std::min(k.u_min, u);
                k.u_max = std::max(k.u_max, u);
                k.v_min = std::min(k.v_min, v);
                k.v_max = std::max(k.v_max, v);
                float d = fr.depth_at(v, u);
                if (d > 0) masked_depths.push_back(d);
            }
        if (k.u_max < 0) continue;  // empty union mask, not a usable keyframe
        if (masked_depths.empty()) continue;  // no depth to anchor sampling
        std::nth_element(masked_depths.begin(), masked_depths.begin() + masked_depths.size() / 2,
                         masked_depths.end());
        k.median_depth = masked_depths[masked_depths.size() / 2];
        sup.keyframes.push_back(std::move(k));
    }
    if (sup.keyframes.empty())
        throw std::runtime_error("build_supervision: object has no keyframe with valid depth");
    return sup;
}

namespace {

FieldNetwork make_field(const ObjectInstance& obj, const Dataset& ds, const TrainConfig& cfg,
                        uint64_t seed) {
    FieldConfig arch = cfg.arch;
    arch.feat_dim = ds.embed_dim();
    Eigen::Vector3d half = 0.5 * (obj.bbox.max - obj.bbox.min);
    half = (half * (1.0 + cfg.domain_expand)).array() + 3.0 * cfg.sampling.sigma_s;
    return FieldNetwork(arch, obj.bbox.center(), half, seed);
}

struct StepBatch {
    std::vector<RaySampleBatch> rays;
    std::vector<PixelTarget> targets;
};

StepBatch sample_step_batch(const ObjectSupervision::Keyframe& kf, const FrameRecord& fr,
                            const FeatureImage& feat_img, const TrainConfig& cfg,
                            std::mt19937_64& rng) {
    StepBatch batch;
    std::uniform_int_distribution<int> du(kf.u_min, kf.u_max);
    std::uniform_int_distribution<int> dv(kf.v_min, kf.v_max);
    for (int r = 0; r < cfg.rays_per_object; ++r) {
        int u = du(rng), v = dv(rng);
        bool in_mask = kf.mask[size_t(v) * size_t(fr.width) + size_t(u)] != 0;
        float d = fr.depth_at(v, u);
        double t_s = d > 0 ? double(d) : kf.median_depth;
        if (!(t_s > cfg.sampling.t_near)) continue;

        PixelTarget t;
        t.in_mask = in_mask;
        t.depth_valid = in_mask && d > 0;
        t.depth = double(d);
        if (in_mask) {
            t.color = fr.color_at(v, u).cast<double>();
            FeatureTarget ft = feature_target(feat_img, v, u);
            t.feat_valid = ft.valid;
            t.feat = ft.value.cast<double>();
        }
        if (t.feat.size() == 0) t.feat = Eigen::VectorXd::Zero(feat_img.dim);
        batch.rays.push_back(sample_ray(u, v, t_s, fr.intrinsics, fr.pose, cfg.sampling, rng));
        batch.targets.push_back(std::move(t));
    }
    return batch;
}

LossBreakdown train_step(FieldNetwork& net, AdamState& adam, const StepBatch& batch,
                         const TrainConfig& cfg) {
    // stack all rays into one forward/backward pass
    std::vector<int64_t> offsets;
    int64_t total = 0;
    for (const auto& r : batch.rays) {
        offsets.push_back(total);
        total += int64_t(r.depths.size());
    }
    Eigen::Matrix<double, Eigen::Dynamic, 3> pts(total, 3);
    for (size_t i = 0; i < batch.rays.size(); ++i)
        pts.middleRows(offsets[i], int64_t(batch.rays[i].depths.size())) = batch.rays[i].points;

    ForwardCache cache;
    FieldOutput out = net.forward(pts, &cache);

    std::vector<RenderedPixel> rendered;
    rendered.reserve(batch.rays.size());
    for (size_t i = 0; i < batch.rays.size(); ++i) {
        int64_t n = int64_t(batch.rays[i].depths.size());
        Eigen::VectorXd depths =
            Eigen::Map<const Eigen::VectorXd>(batch.rays[i].depths.data(), n);
        rendered.push_back(render_ray(out.occ.segment(offsets[i], n),
                                      out.color.middleRows(offsets[i], n),
                                      out.feat.middleRows(offsets[i], n), depths));
    }

    LossBreakdown loss = compute_losses(rendered, batch.targets, cfg.loss);
    if (!std::isfinite(loss.total))
        throw std::runtime_error("train_step: non-finite loss (divergence)");

    std::vector<PixelGradients> pg = loss_gradients(rendered, batch.targets, cfg.loss);
    Eigen::MatrixXd d_color = Eigen::MatrixXd::Zero(total, 3);
    Eigen::VectorXd d_occ = Eigen::VectorXd::Zero(total);
    Eigen::MatrixXd d_feat = Eigen::MatrixXd::Zero(total, out.feat.cols());
    for (size_t i = 0; i < batch.rays.size(); ++i) {
        int64_t n = int64_t(batch.rays[i].depths.size());
        Eigen::VectorXd depths =
            Eigen::Map<const Eigen::VectorXd>(batch.rays[i].depths.data(), n);
        RayGradients rg = render_ray_backward(
            out.occ.segment(offsets[i], n), out.color.middleRows(offsets[i], n),
            out.feat.middleRows(offsets[i], n), depths, rendered[i], pg[i].d_occ, pg[i].d_depth,
            pg[i].d_color, pg[i].d_feat);
        d_occ.segment(offsets[i], n) = rg.d_occ;
        d_color.middleRows(offsets[i], n) = rg.d_color;
        d_feat.middleRows(offsets[i], n) = rg.d_feat;
    }

    FieldParamSet grads = net.zero_like();
    net.backward(cache, out, d_color, d_occ, d_feat, grads);
    adam_step(net, grads, adam, cfg.adam);
    return loss;
}

}  // namespace

TrainResult train_objects(const std::vector<ObjectInstance>& objects, const Dataset& ds,
                          FeatureImageCache& features, const TrainConfig& cfg) {
    std::vector<ObjectSupervision> sup;
    std::set<int> needed_frames;
    for (const auto& obj : objects) {
        sup.push_back(build_supervision(obj, ds, cfg));
        for (const auto& kf : sup.back().keyframes) needed_frames.insert(kf.frame_index);
    }
    features.ensure({needed_frames.begin(), needed_frames.end()});

    TrainResult result;
    result.fields.resize(objects.size());
    result.curves.resize(objects.size());

    parallel_for(int64_t(objects.size()), cfg.threads, [&](int64_t oi) {
        const ObjectInstance& obj = objects[size_t(oi)];
        uint64_t oseed = mix2(cfg.seed, uint64_t(obj.id));
        FieldNetwork net = make_field(obj, ds, cfg, oseed);
        AdamState adam = make_adam_state(net);
        std::mt19937_64 rng(mix2(oseed, 0x7261797321ull));

        auto& curve = result.curves[size_t(oi)];
        curve.reserve(size_t(cfg.steps));
        const auto& kfs = sup[size_t(oi)].keyframes;
        for (int step = 0; step < cfg.steps; ++step) {
            const auto& kf = kfs[rng() % kfs.size()];
            const FrameRecord& fr = ds.frame(size_t(kf.frame_index));
            StepBatch batch =
                sample_step_batch(kf, fr, features.get(kf.frame_index), cfg, rng);
            if (batch.rays.empty()) continue;
            try {
                curve.push_back(train_step(net, adam, batch, cfg));
            } catch (const std::exception& e) {
                throw std::runtime_error("object " + std::to_string(obj.id) + " step " +
                                         std::to_string(step) + ": " + e.what());
            }
        }
        result.fields[size_t(oi)] = std::move(net);
    });
    return result;
}

ObjectEvalMetrics evaluate_object(const FieldNetwork& net, const ObjectInstance& obj,
                                  const Dataset& ds, FeatureImageCache& features,
                                  const TrainConfig& cfg, int64_t max_pixels, uint64_t seed) {
    ObjectSupervision sup = build_supervision(obj, ds, cfg);
    std::mt19937_64 rng(mix2(seed, 0x6576616cull));
    ObjectEvalMetrics m;
    double cos_sum = 0.0;

    std::vector<std::pair<int, std::pair<int, int>>> pixels;  // (kf idx, (u,v))
    for (size_t ki = 0; ki < sup.keyframes.size(); ++ki) {
        const auto& kf = sup.keyframes[ki];
        const FrameRecord& fr = ds.frame(size_t(kf.frame_index));
        for (int v = kf.v_min; v <= kf.v_max; ++v)
            for (int u = kf.u_min; u <= kf.u_max; ++u)
                if (kf.mask[size_t(v) * size_t(fr.width) + size_t(u)])
                    pixels.push_back({int(ki), {u, v}});
    }
    std::shuffle(pixels.begin(), pixels.end(), rng);
    if (int64_t(pixels.size()) > max_pixels) pixels.resize(size_t(max_pixels));

    for (const auto& [ki, uv] : pixels) {
        const auto& kf = sup.keyframes[size_t(ki)];
        const FrameRecord& fr = ds.frame(size_t(kf.frame_index));
        const FeatureImage& fimg = features.get(kf.frame_index);
        auto [u, v] = uv;
        float d = fr.depth_at(v, u);
        double t_s = d > 0 ? double(d) : kf.median_depth;
        if (!(t_s > cfg.sampling.t_near)) continue;
        RaySampleBatch ray = sample_ray(u, v, t_s, fr.intrinsics, fr.pose, cfg.sampling, rng);
        FieldOutput out = net.forward(ray.points);
        Eigen::VectorXd depths =
            Eigen::Map<const Eigen::VectorXd>(ray.depths.data(), int64_t(ray.depths.size()));
        RenderedPixel r = render_ray(out.occ, out.color, out.feat, depths);

        if (d > 0) {
            m.depth_mae += std::abs(r.depth - double(d));
            ++m.depth_count;
        }
        m.color_mae += (r.color - fr.color_at(v, u).cast<double>()).cwiseAbs().mean();
        ++m.color_count;
        FeatureTarget ft = feature_target(fimg, v, u);
        if (ft.valid) {
            Eigen::VectorXd target = ft.value.cast<double>();
            double denom = r.feat.norm() * target.norm();
            if (denom > 0) {
                cos_sum += r.feat.dot(target) / denom;
                ++m.feat_count;
            }
        }
    }
    if (m.depth_count) m.depth_mae /= double(m.depth_count);
    if (m.color_count) m.color_mae /= double(m.color_count);
    if (m.feat_count) m.feat_cosine = cos_sum / double(m.feat_count);
    return m;
}

std::optional<std::pair<double, double>> intersect_ray_bbox(const Eigen::Vector3d& origin,
                                                            const Eigen::Vector3d& dir,
                                                            const Bbox3& box) {
    double t0 = 0.0, t1 = 1e300;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(dir[a]) < 1e-15) {
            if (origin[a] < box.min[a] || origin[a] > box.max[a]) return std::nullopt;
            continue;
        }
        double lo = (box.min[a] - origin[a]) / dir[a];
        double hi = (box.max[a] - origin[a]) / dir[a];
        if (lo > hi) std::swap(lo, hi);
        t0 = std::max(t0, lo);
        t1 = std::min(t1, hi);
        if (t0 > t1) return std::nullopt;
    }
    if (t1 <= 1e-9) return std::nullopt;
    return std::make_pair(std::max(t0, 1e-9), t1);
}

RenderedImage render_view(const std::vector<FieldNetwork>& fields, const Intrinsics& K,
                          const Eigen::Matrix4d& pose, int height, int width,
                          int samples_per_ray, int threads) {
    RenderedImage img;
    img.height = height;
    img.width = width;
    img.feat_dim = fields.empty() ? 0 : fields[0].config().feat_dim;
    const size_t npx = size_t(height) * size_t(width);
    img.color.assign(npx * 3, 0.0f);
    img.depth.assign(npx, 0.0f);
    img.feat.assign(npx * size_t(img.feat_dim), 0.0f);
    img.object.assign(npx, -1);

    const Eigen::Matrix3d R = pose.block<3, 3>(0, 0);
    const Eigen::Vector3d eye = pose.block<3, 1>(0, 3);

    parallel_for(int64_t(height), threads, [&](int64_t v) {
        for (int u = 0; u < width; ++u) {
            size_t i = size_t(v) * size_t(width) + size_t(u);
            Eigen::Vector3d dir =
                R * Eigen::Vector3d((double(u) - K.cx) / K.fx, (double(v) - K.cy) / K.fy, 1.0);
            double best_depth = 1e300;
            for (size_t k = 0; k < fields.size(); ++k) {
                const FieldNetwork& net = fields[k];
                Bbox3 domain{net.center() - net.half_extent(), net.center() + net.half_extent()};
                auto seg = intersect_ray_bbox(eye, dir, domain);
                if (!seg) continue;
                auto [t0, t1] = *seg;
                if (t1 - t0 < 1e-9) continue;
                Eigen::VectorXd depths(samples_per_ray);
                Eigen::Matrix<double, Eigen::Dynamic, 3> pts(samples_per_ray, 3);
                for (int s = 0; s < samples_per_ray; ++s) {
                    depths[s] = t0 + (double(s) + 0.5) * (t1 - t0) / double(samples_per_ray);
                    pts.row(s) = (eye + depths[s] * dir).transpose();
                }
                FieldOutput out = net.forward(pts);
                RenderedPixel r = render_ray(out.occ, out.color, out.feat, depths);
                if (r.occ > 0.5 && r.depth < best_depth) {
                    best_depth = r.depth;
                    img.object[i] = int(k);
                    img.depth[i] = float(r.depth);
                    for (int ch = 0; ch < 3; ++ch) img.color[i * 3 + size_t(ch)] = float(r.color[ch]);
                    for (int d = 0; d < img.feat_dim; ++d)
                        img.feat[i * size_t(img.feat_dim) + size_t(d)] = float(r.feat[d]);
                }
            }
        }
    });
    return img;
}

}  // namespace openobj

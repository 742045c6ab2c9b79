#include "openobj/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "openobj/tensor.hpp"

namespace openobj {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Eigen::VectorXd read_embedding_file(const fs::path& path) {
    TensorBlob t = read_tensor(path);
    if (t.ndim() != 1) throw std::runtime_error("embedding file must be a 1-D tensor: " + path.string());
    Eigen::VectorXd out(int64_t(t.numel()));
    if (t.dtype() == DType::F64) {
        std::vector<double> v = t.as_f64();
        for (size_t i = 0; i < v.size(); ++i) out[int64_t(i)] = v[i];
    } else if (t.dtype() == DType::F32) {
        std::vector<float> v = t.as_f32();
        for (size_t i = 0; i < v.size(); ++i) out[int64_t(i)] = double(v[i]);
    } else {
        throw std::runtime_error("embedding file must be f32 or f64: " + path.string());
    }
    return out;
}

struct GroundTruth {
    struct Object {
        int id = 0;
        Eigen::VectorXd clip, cap;
        std::vector<Eigen::VectorXd> parts;  // boxes: 6 face embeddings
    };
    std::vector<Object> objects;

    static GroundTruth load(const fs::path& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("ground truth not found: " + path.string());
        json j = json::parse(f);
        GroundTruth gt;
        for (const auto& jo : j.at("objects")) {
            Object o;
            o.id = jo.at("id").get<int>();
            auto vec = [](const json& a) {
                Eigen::VectorXd v(a.size());
                for (size_t i = 0; i < a.size(); ++i) v[int64_t(i)] = a[i].get<double>();
                return v;
            };
            o.clip = vec(jo.at("clip"));
            o.cap = vec(jo.at("cap"));
            if (jo.contains("parts"))
                for (const auto& p : jo.at("parts")) o.parts.push_back(vec(p));
            gt.objects.push_back(std::move(o));
        }
        return gt;
    }
};

}  // namespace

PipelineConfig PipelineConfig::from_json_file(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config file not found: " + path.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return from_json(j);
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig cfg;
    try {
        reject_unknown_keys(j,
                            {"dataset", "output", "similarity", "fine", "descriptors", "training",
                             "surface_resolution", "render_samples", "tau_agg", "seed", "threads",
                             "dump_similarity"},
                            "top level");
        cfg.dataset = j.at("dataset").get<std::string>();
        cfg.output = j.at("output").get<std::string>();
        if (j.contains("similarity")) {
            const json& s = j.at("similarity");
            reject_unknown_keys(s, {"w_geo", "w_pho", "w_clip", "w_cap", "theta_mask"},
                                "similarity");
            read_key(s, "w_geo", cfg.similarity.w_geo);
            read_key(s, "w_pho", cfg.similarity.w_pho);
            read_key(s, "w_clip", cfg.similarity.w_clip);
            read_key(s, "w_cap", cfg.similarity.w_cap);
            read_key(s, "theta_mask", cfg.similarity.theta_mask);
        }
        if (j.contains("fine")) {
            const json& s = j.at("fine");
            reject_unknown_keys(s, {"theta_dist", "theta_pc", "theta_pho"}, "fine");
            read_key(s, "theta_dist", cfg.fine.theta_dist);
            read_key(s, "theta_pc", cfg.fine.theta_pc);
            read_key(s, "theta_pho", cfg.fine.theta_pho);
        }
        if (j.contains("descriptors")) {
            const json& s = j.at("descriptors");
            reject_unknown_keys(s, {"trim_quantile", "max_points"}, "descriptors");
            read_key(s, "trim_quantile", cfg.descriptors.trim_quantile);
            read_key(s, "max_points", cfg.descriptors.max_points);
        }
        if (j.contains("training")) {
            const json& s = j.at("training");
            reject_unknown_keys(s,
                                {"steps", "rays_per_object", "n_uniform", "n_surface", "t_near",
                                 "sigma_s", "lr", "lambda_occ", "lambda_depth", "lambda_color",
                                 "lambda_feat", "n_keyframes", "keyframe_min_pixels", "enc_freqs",
                                 "hidden_layers", "hidden_dim", "domain_expand"},
                                "training");
            read_key(s, "steps", cfg.training.steps);
            read_key(s, "rays_per_object", cfg.training.rays_per_object);
            read_key(s, "n_uniform", cfg.training.sampling.n_uniform);
            read_key(s, "n_surface", cfg.training.sampling.n_surface);
            read_key(s, "t_near", cfg.training.sampling.t_near);
            read_key(s, "sigma_s", cfg.training.sampling.sigma_s);
            read_key(s, "lr", cfg.training.adam.lr);
            read_key(s, "lambda_occ", cfg.training.loss.occ);
            read_key(s, "lambda_depth", cfg.training.loss.depth);
            read_key(s, "lambda_color", cfg.training.loss.color);
            read_key(s, "lambda_feat", cfg.training.loss.feat);
            read_key(s, "n_keyframes", cfg.training.n_keyframes);
            read_key(s, "keyframe_min_pixels", cfg.training.keyframe_min_pixels);
            read_key(s, "enc_freqs", cfg.training.arch.enc_freqs);
            read_key(s, "hidden_layers", cfg.training.arch.hidden_layers);
            read_key(s, "hidden_dim", cfg.training.arch.hidden_dim);
            read_key(s, "domain_expand", cfg.training.domain_expand);
        }
        read_key(j, "surface_resolution", cfg.surface_resolution);
        read_key(j, "render_samples", cfg.render_samples);
        read_key(j, "tau_agg", cfg.tau_agg);
        read_key(j, "seed", cfg.seed);
        read_key(j, "threads", cfg.threads);
        read_key(j, "dump_similarity", cfg.dump_similarity);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

void PipelineConfig::validate() const {
    if (dataset.empty()) throw ConfigError("config: dataset path missing");
    if (!fs::exists(dataset)) throw ConfigError("config: dataset path does not exist: " + dataset.string());
    if (output.empty()) throw ConfigError("config: output path missing");
    try {
        similarity.validate();
        fine.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (training.steps < 1) throw ConfigError("config: training.steps must be >= 1");
    if (training.rays_per_object < 1) throw ConfigError("config: rays_per_object must be >= 1");
    if (training.sampling.n_uniform < 2) throw ConfigError("config: n_uniform must be >= 2");
    if (training.sampling.n_surface < 0) throw ConfigError("config: n_surface must be >= 0");
    if (!(training.sampling.t_near > 0)) throw ConfigError("config: t_near must be > 0");
    if (!(training.sampling.sigma_s > 0)) throw ConfigError("config: sigma_s must be > 0");
    if (!(training.adam.lr > 0)) throw ConfigError("config: lr must be > 0");
    if (training.n_keyframes < 1) throw ConfigError("config: n_keyframes must be >= 1");
    if (surface_resolution < 2) throw ConfigError("config: surface_resolution must be >= 2");
    if (render_samples < 1) throw ConfigError("config: render_samples must be >= 1");
    if (tau_agg < 0 || tau_agg > 2) throw ConfigError("config: tau_agg must be in [0, 2]");
    if (threads < 1) throw ConfigError("config: threads must be >= 1");
}

Pipeline::Pipeline(const PipelineConfig& cfg)
    : cfg_(cfg), ds_(Dataset::load(cfg.dataset)), features_(ds_) {
    cfg_.training.seed = cfg_.seed;
    cfg_.training.threads = cfg_.threads;
    cfg_.descriptors.threads = cfg_.threads;
    fs::create_directories(cfg_.output);
}

const std::vector<MaskDescriptor>& Pipeline::get_descriptors() {
    if (!descriptors_) descriptors_ = compute_descriptors(ds_, cfg_.descriptors);
    return *descriptors_;
}

std::filesystem::path Pipeline::checkpoint_path(int object_id) const {
    return cfg_.output / "checkpoints" / ("object_" + std::to_string(object_id) + ".ckpt");
}

const std::vector<ObjectInstance>& Pipeline::objects() {
    if (!objects_) cluster();
    return *objects_;
}

void Pipeline::write_objects_json() const {
    json j;
    j["objects"] = json::array();
    for (const auto& obj : *objects_) {
        json jo;
        jo["id"] = obj.id;
        jo["members"] = json::array();
        for (const auto& ref : obj.members)
            jo["members"].push_back({{"frame", ref.frame}, {"mask", ref.mask}});
        jo["bbox_min"] = {obj.bbox.min[0], obj.bbox.min[1], obj.bbox.min[2]};
        jo["bbox_max"] = {obj.bbox.max[0], obj.bbox.max[1], obj.bbox.max[2]};
        j["objects"].push_back(std::move(jo));
    }
    std::ofstream f(cfg_.output / "objects.json");
    f << j.dump(2) << "\n";
}

json Pipeline::cluster() {
    Eigen::MatrixXd similarity;
    objects_ = cluster_pipeline(ds_, get_descriptors(), cfg_.similarity, cfg_.fine, cfg_.seed,
                                cfg_.threads, cfg_.dump_similarity ? &similarity : nullptr);
    if (cfg_.dump_similarity) {
        std::vector<double> flat(similarity.data(), similarity.data() + similarity.size());
        // Eigen stores column-major; the matrix is symmetric so the layout is moot.
        write_tensor(cfg_.output / "similarity.obnt",
                     TensorBlob::from_f64({uint64_t(similarity.rows()), uint64_t(similarity.cols())},
                                          flat));
    }
    write_objects_json();

    json result;
    result["command"] = "cluster";
    result["mask_count"] = get_descriptors().size();
    result["object_count"] = objects_->size();
    result["member_counts"] = json::array();
    for (const auto& obj : *objects_) result["member_counts"].push_back(obj.members.size());
    // Ground-truth agreement when the dataset carries mask-level GT ids.
    bool has_gt = !objects_->empty();
    for (const auto& obj : *objects_)
        for (const auto& ref : obj.members)
            if (!ds_.mask(ref).gt_object_id) has_gt = false;
    if (has_gt) {
        int64_t agree = 0, total = 0;
        for (const auto& obj : *objects_) {
            std::map<int, int> votes;
            for (const auto& ref : obj.members) ++votes[*ds_.mask(ref).gt_object_id];
            int best = -1, best_n = -1;
            for (const auto& [id, n] : votes)
                if (n > best_n) best = id, best_n = n;
            for (const auto& ref : obj.members) agree += *ds_.mask(ref).gt_object_id == best;
            total += int64_t(obj.members.size());
        }
        result["gt_agreement"] = double(agree) / double(total);
    }
    return result;
}

json Pipeline::train() {
    const auto& objs = objects();
    TrainResult tr = train_objects(objs, ds_, features_, cfg_.training);

    fs::create_directories(cfg_.output / "checkpoints");
    for (size_t i = 0; i < objs.size(); ++i)
        save_checkpoint(checkpoint_path(objs[i].id), tr.fields[i]);

    {
        std::ofstream f(cfg_.output / "training_log.csv");
        f << "object,step,occ,depth,color,feat,total\n";
        for (size_t i = 0; i < objs.size(); ++i)
            for (size_t s = 0; s < tr.curves[i].size(); ++s) {
                const LossBreakdown& l = tr.curves[i][s];
                f << objs[i].id << "," << s << "," << fmt_double(l.occ) << ","
                  << fmt_double(l.depth) << "," << fmt_double(l.color) << ","
                  << fmt_double(l.feat) << "," << fmt_double(l.total) << "\n";
            }
    }

    json result;
    result["command"] = "train";
    result["steps"] = cfg_.training.steps;
    result["objects"] = json::array();
    for (size_t i = 0; i < objs.size(); ++i) {
        ObjectEvalMetrics m =
            evaluate_object(tr.fields[i], objs[i], ds_, features_, cfg_.training, 2000, cfg_.seed);
        json jo;
        jo["id"] = objs[i].id;
        jo["final_loss"] = tr.curves[i].empty() ? 0.0 : tr.curves[i].back().total;
        jo["depth_mae"] = m.depth_mae;
        jo["color_mae"] = m.color_mae;
        jo["feat_cosine"] = m.feat_cosine;
        result["objects"].push_back(std::move(jo));
    }
    fields_ = std::move(tr.fields);
    return result;
}

const std::vector<FieldNetwork>& Pipeline::fields() {
    if (!fields_) {
        std::vector<FieldNetwork> nets;
        for (const auto& obj : objects()) {
            fs::path p = checkpoint_path(obj.id);
            if (!fs::exists(p))
                throw std::runtime_error("missing checkpoint (run `train` first): " + p.string());
            nets.push_back(load_checkpoint(p));
        }
        fields_ = std::move(nets);
    }
    return *fields_;
}

json Pipeline::render(const RenderArgs& args) {
    if (args.frame < 0 || size_t(args.frame) >= ds_.frame_count())
        throw std::runtime_error("render: frame index out of range");
    const FrameRecord& fr = ds_.frame(size_t(args.frame));
    RenderedImage img = render_view(fields(), fr.intrinsics, fr.pose, ds_.height(), ds_.width(),
                                    cfg_.render_samples, cfg_.threads);

    fs::path dir = cfg_.output / "render";
    fs::create_directories(dir);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "frame_%04d", args.frame);
    uint64_t H = uint64_t(img.height), W = uint64_t(img.width);
    write_tensor(dir / (std::string(stem) + "_color.obnt"), TensorBlob::from_f32({H, W, 3}, img.color));
    write_tensor(dir / (std::string(stem) + "_depth.obnt"), TensorBlob::from_f32({H, W}, img.depth));
    write_tensor(dir / (std::string(stem) + "_feat.obnt"),
                 TensorBlob::from_f32({H, W, uint64_t(img.feat_dim)}, img.feat));
    TensorBlob objmap(DType::I32, {H, W});
    std::copy(img.object.begin(), img.object.end(), objmap.data<int32_t>());
    write_tensor(dir / (std::string(stem) + "_object.obnt"), objmap);

    int64_t hit = 0;
    for (int o : img.object) hit += o >= 0;
    json result;
    result["command"] = "render";
    result["frame"] = args.frame;
    result["covered_pixels"] = hit;
    result["total_pixels"] = int64_t(img.object.size());
    return result;
}

const std::vector<SurfaceMesh>& Pipeline::get_surfaces() {
    if (!surfaces_) {
        const auto& objs = objects();
        const auto& nets = fields();
        std::vector<SurfaceMesh> meshes;
        for (size_t i = 0; i < objs.size(); ++i)
            meshes.push_back(extract_surface(nets[i], objs[i].bbox, cfg_.surface_resolution));
        surfaces_ = std::move(meshes);
    }
    return *surfaces_;
}

json Pipeline::extract_surfaces() {
    const auto& objs = objects();
    const auto& meshes = get_surfaces();
    fs::path dir = cfg_.output / "surfaces";
    fs::create_directories(dir);

    json result;
    result["command"] = "extract-surface";
    result["objects"] = json::array();
    for (size_t i = 0; i < objs.size(); ++i) {
        const SurfaceMesh& m = meshes[i];
        std::string stem = "object_" + std::to_string(objs[i].id);
        std::ofstream f(dir / (stem + ".obj"));
        for (int64_t v = 0; v < m.vertices.rows(); ++v)
            f << "v " << fmt_double(m.vertices(v, 0)) << " " << fmt_double(m.vertices(v, 1))
              << " " << fmt_double(m.vertices(v, 2)) << " " << fmt_double(m.colors(v, 0)) << " "
              << fmt_double(m.colors(v, 1)) << " " << fmt_double(m.colors(v, 2)) << "\n";
        for (const auto& t : m.triangles)
            f << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";

        std::vector<float> feat(size_t(m.features.size()));
        for (int64_t v = 0; v < m.features.rows(); ++v)
            for (int64_t d = 0; d < m.features.cols(); ++d)
                feat[size_t(v * m.features.cols() + d)] = float(m.features(v, d));
        write_tensor(dir / (stem + "_features.obnt"),
                     TensorBlob::from_f32(
                         {uint64_t(m.features.rows()), uint64_t(m.features.cols())}, feat));

        result["objects"].push_back({{"id", objs[i].id},
                                     {"vertices", m.vertices.rows()},
                                     {"triangles", m.triangles.size()}});
    }
    return result;
}

const std::vector<ObjectSummary>& Pipeline::summaries() {
    if (!summaries_) {
        std::vector<ObjectSummary> s;
        for (const auto& obj : objects()) s.push_back(aggregate_object_summary(obj, ds_, cfg_.tau_agg));
        summaries_ = std::move(s);
    }
    return *summaries_;
}

void Pipeline::write_summaries() const {
    const auto& sums = *summaries_;
    int64_t de = ds_.embed_dim(), dc = ds_.caption_dim();
    std::vector<double> flat;
    for (const auto& s : sums) {
        flat.push_back(double(s.object_id));
        for (int64_t i = 0; i < de; ++i) flat.push_back(s.clip[i]);
        for (int64_t i = 0; i < dc; ++i) flat.push_back(s.cap[i]);
    }
    write_tensor(cfg_.output / "summaries.obnt",
                 TensorBlob::from_f64({uint64_t(sums.size()), uint64_t(1 + de + dc)}, flat));
}

json Pipeline::query_object(const QueryObjectArgs& args) {
    std::optional<Eigen::VectorXd> q_clip, q_cap;
    if (!args.clip.empty()) q_clip = read_embedding_file(args.clip);
    if (!args.cap.empty()) q_cap = read_embedding_file(args.cap);
    QueryResult r = query_objects(q_clip, q_cap, summaries());

    json result;
    result["command"] = "query-object";
    result["ranking"] = json::array();
    for (const auto& [id, score] : r.ranking)
        result["ranking"].push_back({{"id", id}, {"score", score}});
    return result;
}

json Pipeline::query_part(const QueryPartArgs& args) {
    Eigen::VectorXd q = read_embedding_file(args.embedding);
    const auto& objs = objects();
    size_t idx = objs.size();
    for (size_t i = 0; i < objs.size(); ++i)
        if (objs[i].id == args.object_id) idx = i;
    if (idx == objs.size()) throw std::runtime_error("query-part: unknown object id");

    const SurfaceMesh& m = get_surfaces()[idx];
    PartQueryResult r = openobj::query_part(q, m.vertices, m.features);

    fs::path dir = cfg_.output / "queries";
    fs::create_directories(dir);
    std::vector<float> scores(size_t(r.scores.size()));
    for (int64_t i = 0; i < r.scores.size(); ++i) scores[size_t(i)] = float(r.scores[i]);
    write_tensor(dir / ("part_scores_object_" + std::to_string(args.object_id) + ".obnt"),
                 TensorBlob::from_f32({uint64_t(scores.size())}, scores));

    json result;
    result["command"] = "query-part";
    result["object"] = args.object_id;
    result["max_score"] = r.scores[r.argmax];
    result["argmax_point"] = {r.argmax_point[0], r.argmax_point[1], r.argmax_point[2]};
    return result;
}

std::vector<int> Pipeline::gt_object_ids() {
    std::vector<int> out;
    for (const auto& obj : objects()) {
        std::map<int, int> votes;
        for (const auto& ref : obj.members) {
            const auto& gt = ds_.mask(ref).gt_object_id;
            if (!gt) throw std::runtime_error("dataset has no per-mask ground-truth ids");
            ++votes[*gt];
        }
        int best = -1, best_n = -1;
        for (const auto& [id, n] : votes)
            if (n > best_n) best = id, best_n = n;
        out.push_back(best);
    }
    return out;
}

json Pipeline::eval_seg() {
    GroundTruth gt = GroundTruth::load(cfg_.dataset / "gt.json");
    std::vector<int> obj_gt = gt_object_ids();
    const auto& meshes = get_surfaces();

    std::vector<Eigen::VectorXd> labels;
    for (const auto& o : gt.objects) labels.push_back(o.clip);

    int64_t total = 0;
    for (const auto& m : meshes) total += m.vertices.rows();
    Eigen::MatrixXd feats(total, ds_.embed_dim());
    std::vector<int> gt_labels(static_cast<size_t>(total));
    int64_t row = 0;
    for (size_t i = 0; i < meshes.size(); ++i) {
        feats.middleRows(row, meshes[i].features.rows()) = meshes[i].features;
        std::fill(gt_labels.begin() + row, gt_labels.begin() + row + meshes[i].features.rows(),
                  obj_gt[i]);
        row += meshes[i].features.rows();
    }
    std::vector<int> pred = semantic_segment(feats, labels);
    auto [miou, macc] = compute_miou_macc(pred, gt_labels, int(labels.size()));

    // Per-class breakdown for the CSV report.
    std::vector<int64_t> tp(labels.size(), 0), fp(labels.size(), 0), fn(labels.size(), 0);
    for (size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == gt_labels[i]) ++tp[size_t(gt_labels[i])];
        else {
            ++fn[size_t(gt_labels[i])];
            if (pred[i] >= 0) ++fp[size_t(pred[i])];
        }
    }
    {
        std::ofstream f(cfg_.output / "eval_seg.csv");
        f << "class,iou,acc\n";
        for (size_t c = 0; c < labels.size(); ++c) {
            int64_t diou = tp[c] + fp[c] + fn[c], dacc = tp[c] + fn[c];
            f << c << "," << fmt_double(diou ? double(tp[c]) / double(diou) : 0.0) << ","
              << fmt_double(dacc ? double(tp[c]) / double(dacc) : 0.0) << "\n";
        }
    }

    json result;
    result["command"] = "eval-seg";
    result["miou"] = miou;
    result["macc"] = macc;
    result["points"] = total;
    std::ofstream f(cfg_.output / "eval_seg.json");
    f << result.dump(2) << "\n";
    return result;
}

json Pipeline::eval_retrieval() {
    GroundTruth gt = GroundTruth::load(cfg_.dataset / "gt.json");
    std::vector<int> obj_gt = gt_object_ids();
    const auto& sums = summaries();

    json per_query = json::array();
    double r1 = 0, r2 = 0, r3 = 0;
    std::ofstream csv(cfg_.output / "eval_retrieval.csv");
    csv << "gt_object,r1,r2,r3\n";
    for (const auto& g : gt.objects) {
        QueryResult r = query_objects(g.clip, g.cap, sums);
        auto hit = [&](int k) {
            int limit = std::min<int>(k, int(r.ranking.size()));
            for (int i = 0; i < limit; ++i) {
                int pred_id = r.ranking[size_t(i)].first;
                for (size_t o = 0; o < sums.size(); ++o)
                    if (sums[o].object_id == pred_id && obj_gt[o] == g.id) return 1;
            }
            return 0;
        };
        int h1 = hit(1), h2 = hit(2), h3 = hit(3);
        r1 += h1;
        r2 += h2;
        r3 += h3;
        csv << g.id << "," << h1 << "," << h2 << "," << h3 << "\n";
        per_query.push_back({{"gt_object", g.id}, {"r1", h1}, {"r2", h2}, {"r3", h3}});
    }
    double n = double(gt.objects.size());

    json result;
    result["command"] = "eval-retrieval";
    result["recall_at_1"] = r1 / n;
    result["recall_at_2"] = r2 / n;
    result["recall_at_3"] = r3 / n;
    result["queries"] = per_query;
    std::ofstream f(cfg_.output / "eval_retrieval.json");
    f << result.dump(2) << "\n";
    return result;
}

json Pipeline::run_all() {
    json result;
    result["command"] = "run-all";
    result["cluster"] = cluster();
    result["train"] = train();
    result["extract_surface"] = extract_surfaces();
    summaries();
    write_summaries();
    if (fs::exists(cfg_.dataset / "gt.json")) {
        result["eval_seg"] = eval_seg();
        result["eval_retrieval"] = eval_retrieval();
    }
    return result;
}

json Pipeline::run(const std::string& command, const RenderArgs& render_args,
                   const QueryObjectArgs& qo, const QueryPartArgs& qp) {
    json result;
    if (command == "cluster") result = cluster();
    else if (command == "train") result = train();
    else if (command == "render") result = render(render_args);
    else if (command == "extract-surface") result = extract_surfaces();
    else if (command == "query-object") result = query_object(qo);
    else if (command == "query-part") result = query_part(qp);
    else if (command == "eval-seg") result = eval_seg();
    else if (command == "eval-retrieval") result = eval_retrieval();
    else if (command == "run-all") result = run_all();
    else throw std::runtime_error("unknown command: " + command);

    std::ofstream f(cfg_.output / "result.json");
    f << result.dump(2) << "\n";
    return result;
}

}  // namespace openobj

#include "openobj/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

namespace openobj {

using json = nlohmann::json;

Bbox3 ShapeSpec::aabb() const {
    if (type == Type::Box) return {box_min, box_max};
    return {center.array() - radius, center.array() + radius};
}

Eigen::Matrix4d look_at_pose(const Eigen::Vector3d& eye, const Eigen::Vector3d& lookat) {
    Eigen::Vector3d forward = (lookat - eye).normalized();
    Eigen::Vector3d up_hint(0, 0, 1);
    if (std::abs(forward.dot(up_hint)) > 0.999) up_hint = Eigen::Vector3d(0, 1, 0);
    Eigen::Vector3d x_cam = forward.cross(up_hint).normalized();
    Eigen::Vector3d y_cam = forward.cross(x_cam);  // points world-down
    Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();
    pose.block<3, 1>(0, 0) = x_cam;
    pose.block<3, 1>(0, 1) = y_cam;
    pose.block<3, 1>(0, 2) = forward;
    pose.block<3, 1>(0, 3) = eye;
    return pose;
}

SceneSpec make_three_box_scene() {
    SceneSpec s;
    auto box = [](Eigen::Vector3d lo, Eigen::Vector3d hi, Eigen::Vector3d col) {
        ShapeSpec sh;
        sh.type = ShapeSpec::Type::Box;
        sh.box_min = lo;
        sh.box_max = hi;
        sh.color = col;
        return sh;
    };
    s.objects.push_back(box({-0.80, -0.30, 0.00}, {-0.30, 0.30, 0.50}, {0.85, 0.15, 0.15}));
    s.objects.push_back(box({0.30, -0.30, 0.00}, {0.80, 0.20, 0.40}, {0.15, 0.80, 0.20}));
    s.objects.push_back(box({-0.15, -0.25, 0.00}, {0.25, 0.25, 0.45}, {0.20, 0.25, 0.85}));
    s.orbit_center = {0.0, 0.0, 0.25};
    return s;
}

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    uint64_t h = seed * 0x9E3779B97F4A7C15ull;
    for (uint64_t v : {a, b, c}) {
        h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        h *= 0xBF58476D1CE4E5B9ull;
    }
    return h;
}

struct Hit {
    double depth = 0.0;  // camera-frame z of the hit point
    int object = -1;
    int face = -1;  // boxes: 0..5 = -x,+x,-y,+y,-z,+z; spheres: 0
};

// Ray p(s) = origin + s*dir against one shape; `dir` has camera z == 1 so the
// parameter s is the pinhole depth directly. Returns smallest s > eps.
std::optional<Hit> intersect(const ShapeSpec& sh, const Eigen::Vector3d& origin,
                             const Eigen::Vector3d& dir) {
    constexpr double eps = 1e-9;
    if (sh.type == ShapeSpec::Type::Box) {
        double t_enter = -1e300, t_exit = 1e300;
        int enter_axis = -1, enter_sign = 0;
        for (int a = 0; a < 3; ++a) {
            if (std::abs(dir[a]) < 1e-15) {
                if (origin[a] < sh.box_min[a] || origin[a] > sh.box_max[a]) return std::nullopt;
                continue;
            }
            double t0 = (sh.box_min[a] - origin[a]) / dir[a];
            double t1 = (sh.box_max[a] - origin[a]) / dir[a];
            int sign = 0;  // 0 hits the min face, 1 the max face
            if (t0 > t1) {
                std::swap(t0, t1);
                sign = 1;
            }
            if (t0 > t_enter) {
                t_enter = t0;
                enter_axis = a;
                enter_sign = sign;
            }
            t_exit = std::min(t_exit, t1);
            if (t_enter > t_exit) return std::nullopt;
        }
        if (t_enter <= eps || enter_axis < 0) return std::nullopt;
        return Hit{t_enter, -1, enter_axis * 2 + enter_sign};
    }
    // Sphere: |o + s d - c|^2 = r^2
    Eigen::Vector3d oc = origin - sh.center;
    double A = dir.squaredNorm();
    double B = 2.0 * oc.dot(dir);
    double C = oc.squaredNorm() - sh.radius * sh.radius;
    double disc = B * B - 4 * A * C;
    if (disc < 0) return std::nullopt;
    double sq = std::sqrt(disc);
    double s0 = (-B - sq) / (2 * A);
    if (s0 <= eps) s0 = (-B + sq) / (2 * A);
    if (s0 <= eps) return std::nullopt;
    return Hit{s0, -1, 0};
}

Eigen::VectorXf with_noise(const Eigen::VectorXf& base, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, sigma);
    Eigen::VectorXd v = base.cast<double>();
    for (int i = 0; i < v.size(); ++i) v[i] += n(rng);
    v.normalize();
    return v.cast<float>();
}

std::string tname(int frame, const char* kind, int idx = -1) {
    char buf[64];
    if (idx < 0)
        std::snprintf(buf, sizeof(buf), "frame_%04d_%s.obnt", frame, kind);
    else
        std::snprintf(buf, sizeof(buf), "frame_%04d_%s_%03d.obnt", frame, kind, idx);
    return buf;
}

}  // namespace

Eigen::VectorXf synthetic_object_embedding(int object_id, int dim) {
    Eigen::VectorXf e = Eigen::VectorXf::Zero(dim);
    e[object_id % dim] = 1.0f;
    return e;
}

Eigen::VectorXf synthetic_part_embedding(int object_id, int n_objects, int face, int dim) {
    Eigen::VectorXf e = Eigen::VectorXf::Zero(dim);
    e[object_id % dim] = 1.0f;
    int fidx = n_objects + face;
    if (fidx < dim) e[fidx] = 1.0f;
    e.normalize();
    return e;
}

SceneSpec SceneSpec::from_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DatasetError("cannot open scene spec " + path.string());
    json j = json::parse(f);
    SceneSpec s;
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.d_e = j.value("D_e", s.d_e);
    s.d_c = j.value("D_c", s.d_c);
    s.fov_deg = j.value("fov_deg", s.fov_deg);
    s.embedding_noise = j.value("embedding_noise", s.embedding_noise);
    s.min_mask_pixels = j.value("min_mask_pixels", s.min_mask_pixels);
    s.with_parts = j.value("parts", s.with_parts);
    for (const auto& jo : j.at("objects")) {
        ShapeSpec sh;
        std::string type = jo.at("type").get<std::string>();
        auto vec3 = [&](const json& a) {
            return Eigen::Vector3d(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
        };
        if (type == "box") {
            sh.type = ShapeSpec::Type::Box;
            sh.box_min = vec3(jo.at("min"));
            sh.box_max = vec3(jo.at("max"));
        } else if (type == "sphere") {
            sh.type = ShapeSpec::Type::Sphere;
            sh.center = vec3(jo.at("center"));
            sh.radius = jo.at("radius").get<double>();
        } else {
            throw DatasetError("unknown shape type '" + type + "'");
        }
        if (jo.contains("color")) sh.color = vec3(jo.at("color"));
        s.objects.push_back(sh);
    }
    if (j.contains("poses")) {
        for (const auto& jp : j.at("poses")) {
            auto vec3 = [&](const json& a) {
                return Eigen::Vector3d(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
            };
            s.poses.push_back({vec3(jp.at("eye")), vec3(jp.at("lookat"))});
        }
    }
    if (j.contains("orbit")) {
        const auto& jo = j.at("orbit");
        s.orbit_center = Eigen::Vector3d(jo.at("center")[0].get<double>(),
                                         jo.at("center")[1].get<double>(),
                                         jo.at("center")[2].get<double>());
        s.orbit_radius = jo.value("radius", s.orbit_radius);
        s.orbit_height = jo.value("height", s.orbit_height);
        s.orbit_views = jo.value("views", s.orbit_views);
    }
    return s;
}

void generate_synthetic_scene(const SceneSpec& spec, uint64_t seed,
                              const std::filesystem::path& dir) {
    const int n_obj = int(spec.objects.size());
    if (n_obj == 0) throw DatasetError("scene has no objects");
    for (int a = 0; a < n_obj; ++a)
        for (int b = a + 1; b < n_obj; ++b) {
            Bbox3 ba = spec.objects[size_t(a)].aabb();
            Bbox3 bb = spec.objects[size_t(b)].aabb();
            if (bbox_iou_3d(ba, bb) > 0.0)
                throw DatasetError("objects " + std::to_string(a) + " and " + std::to_string(b) +
                                   " overlap");
        }
    if (spec.d_e < n_obj || spec.d_c < n_obj)
        throw DatasetError("embedding dims must be >= object count");

    std::filesystem::create_directories(dir);

    std::vector<CameraPoseSpec> poses = spec.poses;
    if (poses.empty()) {
        for (int i = 0; i < spec.orbit_views; ++i) {
            double a = 2.0 * M_PI * double(i) / double(spec.orbit_views);
            Eigen::Vector3d eye = spec.orbit_center +
                                  Eigen::Vector3d(spec.orbit_radius * std::cos(a),
                                                  spec.orbit_radius * std::sin(a),
                                                  spec.orbit_height);
            poses.push_back({eye, spec.orbit_center});
        }
    }

    const int W = spec.width, H = spec.height;
    const size_t npx = size_t(W) * size_t(H);
    const double fx = 0.5 * double(W) / std::tan(0.5 * spec.fov_deg * M_PI / 180.0);
    Intrinsics K{fx, fx, 0.5 * double(W - 1), 0.5 * double(H - 1)};

    json manifest;
    manifest["height"] = H;
    manifest["width"] = W;
    manifest["D_e"] = spec.d_e;
    manifest["D_c"] = spec.d_c;
    manifest["depth_scale"] = 1.0;
    manifest["frames"] = json::array();

    for (size_t fi = 0; fi < poses.size(); ++fi) {
        const int frame_id = int(fi);
        Eigen::Matrix4d pose = look_at_pose(poses[fi].eye, poses[fi].lookat);
        const Eigen::Matrix3d R = pose.block<3, 3>(0, 0);
        const Eigen::Vector3d eye = pose.block<3, 1>(0, 3);

        std::vector<uint8_t> color(npx * 3, 0);
        std::vector<float> depth(npx, 0.0f);
        std::vector<int> hit_obj(npx, -1), hit_face(npx, -1);

        for (int v = 0; v < H; ++v) {
            for (int u = 0; u < W; ++u) {
                Eigen::Vector3d dir_cam((double(u) - K.cx) / K.fx, (double(v) - K.cy) / K.fy, 1.0);
                Eigen::Vector3d dir = R * dir_cam;
                Hit best;
                best.depth = 1e300;
                for (int k = 0; k < n_obj; ++k) {
                    auto h = intersect(spec.objects[size_t(k)], eye, dir);
                    if (h && h->depth < best.depth) {
                        best = *h;
                        best.object = k;
                    }
                }
                if (best.object < 0) continue;
                size_t i = size_t(v) * size_t(W) + size_t(u);
                depth[i] = float(best.depth);
                hit_obj[i] = best.object;
                hit_face[i] = best.face;
                const Eigen::Vector3d& c = spec.objects[size_t(best.object)].color;
                for (int ch = 0; ch < 3; ++ch)
                    color[i * 3 + size_t(ch)] =
                        uint8_t(std::lround(std::clamp(c[ch], 0.0, 1.0) * 255.0));
            }
        }

        write_tensor(dir / tname(frame_id, "color"),
                     TensorBlob::from_u8({uint64_t(H), uint64_t(W), 3}, color));
        write_tensor(dir / tname(frame_id, "depth"),
                     TensorBlob::from_f32({uint64_t(H), uint64_t(W)}, depth));

        json jf;
        jf["id"] = frame_id;
        jf["color"] = tname(frame_id, "color");
        jf["depth"] = tname(frame_id, "depth");
        std::vector<double> pv(16);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) pv[size_t(r) * 4 + size_t(c)] = pose(r, c);
        jf["pose"] = pv;
        jf["intrinsics"] = {{"fx", K.fx}, {"fy", K.fy}, {"cx", K.cx}, {"cy", K.cy}};
        jf["masks"] = json::array();

        int mask_idx = 0;
        auto emit_mask = [&](const std::vector<uint8_t>& m, const char* kind, int obj,
                             const Eigen::VectorXf& clip, const Eigen::VectorXf& cap,
                             const std::string& caption) {
            std::string mask_file = tname(frame_id, "mask", mask_idx);
            std::string clip_file = tname(frame_id, "clip", mask_idx);
            std::string cap_file = tname(frame_id, "cap", mask_idx);
            write_tensor(dir / mask_file, TensorBlob::from_u8({uint64_t(H), uint64_t(W)}, m));
            std::vector<float> cv(clip.data(), clip.data() + clip.size());
            write_tensor(dir / clip_file, TensorBlob::from_f32({uint64_t(clip.size())}, cv));
            std::vector<float> av(cap.data(), cap.data() + cap.size());
            write_tensor(dir / cap_file, TensorBlob::from_f32({uint64_t(cap.size())}, av));
            json jm;
            jm["mask"] = mask_file;
            jm["kind"] = kind;
            jm["clip"] = clip_file;
            jm["cap"] = cap_file;
            jm["caption"] = caption;
            jm["gt_object"] = obj;
            jf["masks"].push_back(jm);
            ++mask_idx;
        };

        for (int k = 0; k < n_obj; ++k) {
            std::vector<uint8_t> m(npx, 0);
            int64_t count = 0;
            for (size_t i = 0; i < npx; ++i)
                if (hit_obj[i] == k) {
                    m[i] = 1;
                    ++count;
                }
            if (count < spec.min_mask_pixels) continue;

            std::mt19937_64 rng(mix_seed(seed, uint64_t(frame_id), uint64_t(k), 0));
            Eigen::VectorXf clip = with_noise(synthetic_object_embedding(k, spec.d_e),
                                              spec.embedding_noise, rng);
            Eigen::VectorXf cap = with_noise(synthetic_object_embedding(k, spec.d_c),
                                             spec.embedding_noise, rng);
            emit_mask(m, "instance", k, clip, cap, "object " + std::to_string(k));

            if (!spec.with_parts) continue;
            const int n_faces = spec.objects[size_t(k)].type == ShapeSpec::Type::Box ? 6 : 1;
            for (int f = 0; f < n_faces; ++f) {
                std::vector<uint8_t> pm(npx, 0);
                int64_t pc = 0;
                for (size_t i = 0; i < npx; ++i)
                    if (hit_obj[i] == k && hit_face[i] == f) {
                        pm[i] = 1;
                        ++pc;
                    }
                if (pc < spec.min_mask_pixels) continue;
                Eigen::VectorXf pclip = synthetic_part_embedding(k, n_obj, f, spec.d_e);
                Eigen::VectorXf pcap = synthetic_object_embedding(k, spec.d_c);
                emit_mask(pm, "part", k, pclip, pcap,
                          "object " + std::to_string(k) + " face " + std::to_string(f));
            }
        }
        manifest["frames"].push_back(jf);
    }

    {
        std::ofstream f(dir / "manifest.json");
        f << manifest.dump(2) << "\n";
    }

    // Ground-truth embeddings and geometry, for evaluation harnesses.
    json gt;
    gt["n_objects"] = n_obj;
    gt["objects"] = json::array();
    for (int k = 0; k < n_obj; ++k) {
        const ShapeSpec& sh = spec.objects[size_t(k)];
        json jo;
        jo["id"] = k;
        Eigen::VectorXf ce = synthetic_object_embedding(k, spec.d_e);
        Eigen::VectorXf ae = synthetic_object_embedding(k, spec.d_c);
        jo["clip"] = std::vector<float>(ce.data(), ce.data() + ce.size());
        jo["cap"] = std::vector<float>(ae.data(), ae.data() + ae.size());
        jo["color"] = {sh.color[0], sh.color[1], sh.color[2]};
        if (sh.type == ShapeSpec::Type::Box) {
            jo["type"] = "box";
            jo["min"] = {sh.box_min[0], sh.box_min[1], sh.box_min[2]};
            jo["max"] = {sh.box_max[0], sh.box_max[1], sh.box_max[2]};
            jo["parts"] = json::array();
            for (int f = 0; f < 6; ++f) {
                Eigen::VectorXf pe = synthetic_part_embedding(k, n_obj, f, spec.d_e);
                jo["parts"].push_back(std::vector<float>(pe.data(), pe.data() + pe.size()));
            }
        } else {
            jo["type"] = "sphere";
            jo["center"] = {sh.center[0], sh.center[1], sh.center[2]};
            jo["radius"] = sh.radius;
        }
        gt["objects"].push_back(jo);
    }
    std::ofstream gf(dir / "gt.json");
    gf << gt.dump(2) << "\n";
}

}  // namespace openobj

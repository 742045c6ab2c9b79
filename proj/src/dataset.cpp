#include "openobj/dataset.hpp"

#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

namespace openobj {

using json = nlohmann::json;

int64_t MaskRecord::pixel_count() const {
    int64_t n = 0;
    for (uint8_t m : mask) n += m != 0;
    return n;
}

void validate_pose(const Eigen::Matrix4d& pose, double tol) {
    Eigen::Matrix3d R = pose.block<3, 3>(0, 0);
    double ortho_err = (R * R.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (ortho_err > tol)
        throw DatasetError("pose rotation not orthonormal (error " + std::to_string(ortho_err) + ")");
    if (std::abs(R.determinant() - 1.0) > 1e-3)
        throw DatasetError("pose rotation determinant " + std::to_string(R.determinant()) + " != 1");
    if (pose.row(3) != Eigen::RowVector4d(0, 0, 0, 1))
        throw DatasetError("pose bottom row is not [0,0,0,1]");
}

PointCloud backproject_mask(const std::vector<uint8_t>& mask, const std::vector<float>& depth,
                            int height, int width, const Intrinsics& K,
                            const Eigen::Matrix4d& pose, const std::vector<float>* color) {
    if (mask.size() != size_t(height) * size_t(width) || depth.size() != mask.size())
        throw DatasetError("backproject_mask: shape mismatch");
    std::vector<Eigen::Vector3d> pts;
    std::vector<Eigen::Vector3d> cols;
    const Eigen::Matrix3d R = pose.block<3, 3>(0, 0);
    const Eigen::Vector3d t = pose.block<3, 1>(0, 3);
    for (int v = 0; v < height; ++v) {
        for (int u = 0; u < width; ++u) {
            size_t i = size_t(v) * size_t(width) + size_t(u);
            if (!mask[i]) continue;
            double d = depth[i];
            if (!(d > 0.0)) continue;
            Eigen::Vector3d cam(d * (double(u) - K.cx) / K.fx, d * (double(v) - K.cy) / K.fy, d);
            pts.push_back(R * cam + t);
            if (color) cols.emplace_back((*color)[i * 3], (*color)[i * 3 + 1], (*color)[i * 3 + 2]);
        }
    }
    if (pts.empty()) throw DatasetError("backproject_mask: no masked pixel has valid depth");
    PointCloud out;
    out.points.resize(int64_t(pts.size()), 3);
    for (size_t i = 0; i < pts.size(); ++i) out.points.row(int64_t(i)) = pts[i];
    if (color) {
        out.colors.resize(int64_t(cols.size()), 3);
        for (size_t i = 0; i < cols.size(); ++i) out.colors.row(int64_t(i)) = cols[i];
    }
    return out;
}

Eigen::Vector3d project_point(const Eigen::Vector3d& world, const Intrinsics& K,
                              const Eigen::Matrix4d& pose) {
    const Eigen::Matrix3d R = pose.block<3, 3>(0, 0);
    const Eigen::Vector3d t = pose.block<3, 1>(0, 3);
    Eigen::Vector3d cam = R.transpose() * (world - t);
    return {K.fx * cam.x() / cam.z() + K.cx, K.fy * cam.y() / cam.z() + K.cy, cam.z()};
}

namespace {

Eigen::VectorXf load_embedding(const std::filesystem::path& path, int expected_dim,
                               const char* what) {
    TensorBlob t = read_tensor(path);
    if (t.dtype() != DType::F32)
        throw DatasetError(std::string(what) + ": embedding must be f32 (" + path.string() + ")");
    if (int(t.numel()) != expected_dim)
        throw DatasetError(std::string(what) + ": dim " + std::to_string(t.numel()) +
                           " != manifest dim " + std::to_string(expected_dim));
    Eigen::VectorXf v(expected_dim);
    std::memcpy(v.data(), t.data<float>(), size_t(expected_dim) * 4);
    double norm = v.cast<double>().norm();
    if (std::abs(norm - 1.0) > 1e-4)
        throw DatasetError(std::string(what) + ": embedding norm " + std::to_string(norm) +
                           " not unit");
    return v;
}

}  // namespace

Dataset Dataset::load(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw DatasetError("missing manifest.json in " + dir.string());
    json m = json::parse(mf);

    Dataset ds;
    ds.root_ = dir;
    ds.height_ = m.at("height").get<int>();
    ds.width_ = m.at("width").get<int>();
    ds.d_e_ = m.at("D_e").get<int>();
    ds.d_c_ = m.at("D_c").get<int>();
    ds.depth_scale_ = m.at("depth_scale").get<double>();
    if (ds.height_ <= 0 || ds.width_ <= 0) throw DatasetError("non-positive image size");

    const size_t npx = size_t(ds.height_) * size_t(ds.width_);
    for (const auto& jf : m.at("frames")) {
        FrameRecord fr;
        fr.frame_id = jf.at("id").get<int>();
        fr.height = ds.height_;
        fr.width = ds.width_;

        TensorBlob color = read_tensor(dir / jf.at("color").get<std::string>());
        if (color.dtype() != DType::U8 || color.numel() != npx * 3)
            throw DatasetError("frame " + std::to_string(fr.frame_id) + ": bad color tensor");
        fr.color.resize(npx * 3);
        for (size_t i = 0; i < npx * 3; ++i) fr.color[i] = float(color.data<uint8_t>()[i]) / 255.0f;

        TensorBlob depth = read_tensor(dir / jf.at("depth").get<std::string>());
        if (depth.dtype() != DType::F32 || depth.numel() != npx)
            throw DatasetError("frame " + std::to_string(fr.frame_id) + ": bad depth tensor");
        fr.depth = depth.as_f32();
        if (ds.depth_scale_ != 1.0)
            for (float& d : fr.depth) d *= float(ds.depth_scale_);

        auto pose_vals = jf.at("pose").get<std::vector<double>>();
        if (pose_vals.size() != 16) throw DatasetError("pose must have 16 entries");
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) fr.pose(r, c) = pose_vals[size_t(r) * 4 + size_t(c)];
        validate_pose(fr.pose);

        const auto& ji = jf.at("intrinsics");
        fr.intrinsics = {ji.at("fx").get<double>(), ji.at("fy").get<double>(),
                         ji.at("cx").get<double>(), ji.at("cy").get<double>()};
        if (fr.intrinsics.fx <= 0 || fr.intrinsics.fy <= 0)
            throw DatasetError("non-positive focal length");

        int mask_index = 0;
        for (const auto& jm : jf.at("masks")) {
            MaskRecord mr;
            mr.frame_id = fr.frame_id;
            mr.mask_index = mask_index++;
            mr.height = ds.height_;
            mr.width = ds.width_;
            std::string kind = jm.at("kind").get<std::string>();
            if (kind == "instance") mr.kind = MaskKind::Instance;
            else if (kind == "part") mr.kind = MaskKind::Part;
            else throw DatasetError("unknown mask kind '" + kind + "'");

            TensorBlob mask = read_tensor(dir / jm.at("mask").get<std::string>());
            if (mask.dtype() != DType::U8 || mask.numel() != npx)
                throw DatasetError("bad mask tensor in frame " + std::to_string(fr.frame_id));
            mr.mask.assign(mask.data<uint8_t>(), mask.data<uint8_t>() + npx);
            if (mr.pixel_count() == 0)
                throw DatasetError("empty mask in frame " + std::to_string(fr.frame_id));

            mr.clip_embedding = load_embedding(dir / jm.at("clip").get<std::string>(), ds.d_e_, "clip");
            mr.caption_embedding =
                load_embedding(dir / jm.at("cap").get<std::string>(), ds.d_c_, "cap");
            if (jm.contains("caption")) mr.caption = jm.at("caption").get<std::string>();
            if (jm.contains("gt_object")) mr.gt_object_id = jm.at("gt_object").get<int>();
            fr.masks.push_back(std::move(mr));
        }
        ds.frames_.push_back(std::move(fr));
    }

    // Instance masks within one frame must be pairwise disjoint.
    for (size_t fi = 0; fi < ds.frames_.size(); ++fi) {
        const FrameRecord& fr = ds.frames_[fi];
        std::vector<uint8_t> occ(npx, 0);
        for (size_t mi = 0; mi < fr.masks.size(); ++mi) {
            if (fr.masks[mi].kind != MaskKind::Instance) continue;
            for (size_t i = 0; i < npx; ++i) {
                if (!fr.masks[mi].mask[i]) continue;
                if (occ[i])
                    throw DatasetError("overlapping instance masks in frame " +
                                       std::to_string(fr.frame_id));
                occ[i] = 1;
            }
            ds.instance_masks_.push_back({int(fi), int(mi)});
        }
    }
    return ds;
}

}  // namespace openobj

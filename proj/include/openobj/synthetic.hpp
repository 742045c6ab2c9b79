#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <vector>

#include "openobj/dataset.hpp"

namespace openobj {

// Analytic shapes for synthetic scenes. Boxes carry six face part masks
// (-x,+x,-y,+y,-z,+z); spheres carry a single whole-mask part.
struct ShapeSpec {
    enum class Type { Box, Sphere };
    Type type = Type::Box;
    Eigen::Vector3d box_min = Eigen::Vector3d::Zero();
    Eigen::Vector3d box_max = Eigen::Vector3d::Zero();
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double radius = 0.0;
    Eigen::Vector3d color = Eigen::Vector3d::Ones();  // RGB in [0,1]

    Bbox3 aabb() const;
};

struct CameraPoseSpec {
    Eigen::Vector3d eye;
    Eigen::Vector3d lookat;
};

struct SceneSpec {
    int width = 160;
    int height = 120;
    int d_e = 16;
    int d_c = 8;
    double fov_deg = 60.0;
    double embedding_noise = 0.01;
    int min_mask_pixels = 8;
    bool with_parts = true;
    std::vector<ShapeSpec> objects;
    // Explicit poses win; otherwise an orbit around orbit_center is used.
    std::vector<CameraPoseSpec> poses;
    Eigen::Vector3d orbit_center = Eigen::Vector3d::Zero();
    double orbit_radius = 2.2;
    double orbit_height = 1.2;
    int orbit_views = 20;

    static SceneSpec from_json_file(const std::filesystem::path& path);
};

// Three disjoint colored boxes on z=0, viewed from a 20-pose orbit.
SceneSpec make_three_box_scene();

// Camera-to-world look-at pose, x-right / y-down / z-forward, world up +z.
Eigen::Matrix4d look_at_pose(const Eigen::Vector3d& eye, const Eigen::Vector3d& lookat);

// Deterministic instance embedding used by the generator: unit-normalized
// one-hot(object) plus Gaussian noise. Part embeddings are exact
// normalize(e_obj + e_{n_obj + face}) with no noise.
Eigen::VectorXf synthetic_object_embedding(int object_id, int dim);
Eigen::VectorXf synthetic_part_embedding(int object_id, int n_objects, int face, int dim);

// Ray-casts the scene and writes a complete dataset (manifest, tensors,
// ground-truth ids, gt.json with the exact object/part embeddings) to dir.
// Throws on overlapping objects. Byte-identical output for a fixed seed.
void generate_synthetic_scene(const SceneSpec& spec, uint64_t seed,
                              const std::filesystem::path& dir);

}  // namespace openobj

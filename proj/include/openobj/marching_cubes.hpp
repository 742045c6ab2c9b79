#pragma once

#include <array>
#include <vector>

#include "openobj/field.hpp"
#include "openobj/geometry.hpp"

namespace openobj {

// Triangle mesh with per-vertex field attributes.
struct SurfaceMesh {
    Eigen::Matrix<double, Eigen::Dynamic, 3> vertices;
    Eigen::Matrix<double, Eigen::Dynamic, 3> colors;    // empty unless attributed
    Eigen::MatrixXd features;                           // V x D, empty unless attributed
    std::vector<std::array<int, 3>> triangles;

    PointCloud cloud() const;
};

// Marching cubes over a scalar lattice of nx*ny*nz samples spanning grid_box
// (index order: (k*ny + j)*nx + i). Shared edge vertices are deduplicated.
// Throws std::runtime_error when no cell crosses the isovalue.
SurfaceMesh marching_cubes(const std::vector<double>& values, int nx, int ny, int nz,
                           const Bbox3& grid_box, double iso);

// Samples the field's occupancy on a regular grid over the object bbox
// expanded by 10%, extracts the iso-0.5 surface, and attributes each vertex
// with the field's color and feature.
SurfaceMesh extract_surface(const FieldNetwork& net, const Bbox3& object_bbox, int resolution,
                            double iso = 0.5);

}  // namespace openobj

#include "openobj/marching_cubes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace openobj {

namespace {

#include "marching_cubes_tables.inc"

// Lattice offsets of the 8 cube corners, matching the tables' convention.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1},
                               {0, 1, 0}, {1, 1, 0}, {1, 1, 1}, {0, 1, 1}};

// The 12 edges as corner pairs.
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

struct EdgeKeyHash {
    size_t operator()(const std::pair<int64_t, int>& k) const {
        return std::hash<int64_t>()(k.first * 3 + k.second);
    }
};

}  // namespace

PointCloud SurfaceMesh::cloud() const {
    PointCloud c;
    c.points = vertices;
    if (colors.rows() == vertices.rows()) c.colors = colors;
    return c;
}

SurfaceMesh marching_cubes(const std::vector<double>& values, int nx, int ny, int nz,
                           const Bbox3& grid_box, double iso) {
    if (nx < 2 || ny < 2 || nz < 2) throw std::invalid_argument("marching_cubes: lattice < 2^3");
    if (values.size() != size_t(nx) * size_t(ny) * size_t(nz))
        throw std::invalid_argument("marching_cubes: value count mismatch");

    auto lat = [&](int i, int j, int k) -> int64_t {
        return (int64_t(k) * ny + j) * nx + i;
    };
    const Eigen::Vector3d step((grid_box.max.x() - grid_box.min.x()) / (nx - 1),
                               (grid_box.max.y() - grid_box.min.y()) / (ny - 1),
                               (grid_box.max.z() - grid_box.min.z()) / (nz - 1));
    auto pos = [&](int i, int j, int k) -> Eigen::Vector3d {
        return grid_box.min + Eigen::Vector3d(i * step.x(), j * step.y(), k * step.z());
    };

    // Edge key: (lattice index of the lower corner, axis of the edge).
    std::unordered_map<std::pair<int64_t, int>, int, EdgeKeyHash> edge_vertex;
    std::vector<Eigen::Vector3d> verts;
    std::vector<std::array<int, 3>> tris;

    auto edge_point = [&](int i, int j, int k, int e) -> int {
        const int* a = kCorner[kEdge[e][0]];
        const int* b = kCorner[kEdge[e][1]];
        int ai = i + a[0], aj = j + a[1], ak = k + a[2];
        int bi = i + b[0], bj = j + b[1], bk = k + b[2];
        int axis = (ai != bi) ? 0 : (aj != bj) ? 1 : 2;
        bool fwd = (bi + bj + bk) > (ai + aj + ak);
        int64_t lo = fwd ? lat(ai, aj, ak) : lat(bi, bj, bk);
        auto key = std::make_pair(lo, axis);
        auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;

        double va = values[size_t(lat(ai, aj, ak))];
        double vb = values[size_t(lat(bi, bj, bk))];
        double denom = vb - va;
        double mu = std::abs(denom) < 1e-12 ? 0.5 : (iso - va) / denom;
        mu = std::clamp(mu, 0.0, 1.0);
        Eigen::Vector3d pa = pos(ai, aj, ak), pb = pos(bi, bj, bk);
        verts.push_back(pa + mu * (pb - pa));
        int idx = int(verts.size()) - 1;
        edge_vertex.emplace(key, idx);
        return idx;
    };

    for (int k = 0; k < nz - 1; ++k)
        for (int j = 0; j < ny - 1; ++j)
            for (int i = 0; i < nx - 1; ++i) {
                int cubeindex = 0;
                for (int c = 0; c < 8; ++c)
                    if (values[size_t(lat(i + kCorner[c][0], j + kCorner[c][1],
                                          k + kCorner[c][2]))] < iso)
                        cubeindex |= 1 << c;
                if (edgeTable[cubeindex] == 0) continue;

                int pt[12];
                for (int e = 0; e < 12; ++e)
                    if (edgeTable[cubeindex] & (1 << e)) pt[e] = edge_point(i, j, k, e);

                for (int n = 0; triTable[cubeindex][n] != -1; n += 3)
                    tris.push_back({pt[triTable[cubeindex][n]], pt[triTable[cubeindex][n + 1]],
                                    pt[triTable[cubeindex][n + 2]]});
            }

    if (tris.empty()) throw std::runtime_error("marching_cubes: no isovalue crossing (empty surface)");

    SurfaceMesh mesh;
    mesh.vertices.resize(int64_t(verts.size()), 3);
    for (size_t v = 0; v < verts.size(); ++v) mesh.vertices.row(int64_t(v)) = verts[v].transpose();
    mesh.triangles = std::move(tris);
    return mesh;
}

SurfaceMesh extract_surface(const FieldNetwork& net, const Bbox3& object_bbox, int resolution,
                            double iso) {
    if (resolution < 2) throw std::invalid_argument("extract_surface: resolution < 2");
    Bbox3 box = object_bbox.expanded(0.10);
    const int n = resolution;

    Eigen::Matrix<double, Eigen::Dynamic, 3> grid(int64_t(n) * n * n, 3);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                int64_t idx = (int64_t(k) * n + j) * n + i;
                grid.row(idx) =
                    (box.min.array() +
                     Eigen::Array3d(i, j, k) * (box.max - box.min).array() / double(n - 1))
                        .transpose();
            }

    std::vector<double> occ(size_t(grid.rows()));
    constexpr int64_t kChunk = 65536;
    for (int64_t start = 0; start < grid.rows(); start += kChunk) {
        int64_t count = std::min(kChunk, grid.rows() - start);
        FieldOutput out = net.forward(grid.middleRows(start, count));
        for (int64_t r = 0; r < count; ++r) occ[size_t(start + r)] = out.occ[r];
    }

    SurfaceMesh mesh = marching_cubes(occ, n, n, n, box, iso);

    Eigen::Matrix<double, Eigen::Dynamic, 3> vpts = mesh.vertices;
    mesh.colors.resize(vpts.rows(), 3);
    mesh.features.resize(vpts.rows(), net.config().feat_dim);
    for (int64_t start = 0; start < vpts.rows(); start += kChunk) {
        int64_t count = std::min(kChunk, vpts.rows() - start);
        FieldOutput out = net.forward(vpts.middleRows(start, count));
        mesh.colors.middleRows(start, count) = out.color;
        mesh.features.middleRows(start, count) = out.feat;
    }
    return mesh;
}

}  // namespace openobj

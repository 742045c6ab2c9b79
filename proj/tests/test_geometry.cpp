#include <doctest.h>

#include <algorithm>
#include <random>

#include "openobj/geometry.hpp"

using namespace openobj;

namespace {

PointCloud random_cloud(int64_t n, std::mt19937_64& rng, double scale = 1.0) {
    PointCloud c;
    c.points.resize(n, 3);
    std::uniform_real_distribution<double> d(-scale, scale);
    for (int64_t i = 0; i < n; ++i)
        for (int a = 0; a < 3; ++a) c.points(i, a) = d(rng);
    return c;
}

}  // namespace

TEST_CASE("trimmed bbox matches a direct nearest-rank quantile computation") {
    std::mt19937_64 rng(11);
    PointCloud c = random_cloud(257, rng);
    double q = 0.05;
    Bbox3 box = trimmed_bbox(c, q);

    for (int a = 0; a < 3; ++a) {
        std::vector<double> axis(257);
        for (int64_t i = 0; i < 257; ++i) axis[size_t(i)] = c.points(i, a);
        std::sort(axis.begin(), axis.end());
        int64_t lo = int64_t(std::floor(q * 256.0));
        int64_t hi = int64_t(std::ceil((1.0 - q) * 256.0));
        CHECK(box.min[a] == axis[size_t(lo)]);
        CHECK(box.max[a] == axis[size_t(hi)]);
    }
}

TEST_CASE("trimmed bbox with zero trim is the exact min/max") {
    std::mt19937_64 rng(12);
    PointCloud c = random_cloud(40, rng);
    Bbox3 box = trimmed_bbox(c, 0.0);
    for (int a = 0; a < 3; ++a) {
        CHECK(box.min[a] == c.points.col(a).minCoeff());
        CHECK(box.max[a] == c.points.col(a).maxCoeff());
    }
}

TEST_CASE("bbox IoU closed forms") {
    Bbox3 unit{{0, 0, 0}, {1, 1, 1}};
    CHECK(bbox_iou_3d(unit, unit) == doctest::Approx(1.0));

    Bbox3 shifted{{0.5, 0, 0}, {1.5, 1, 1}};
    // intersection 0.5, union 1.5
    CHECK(bbox_iou_3d(unit, shifted) == doctest::Approx(0.5 / 1.5));

    Bbox3 disjoint{{5, 5, 5}, {6, 6, 6}};
    CHECK(bbox_iou_3d(unit, disjoint) == 0.0);

    Bbox3 inner{{0.25, 0.25, 0.25}, {0.75, 0.75, 0.75}};
    CHECK(bbox_iou_3d(unit, inner) == doctest::Approx(0.125));

    Bbox3 point{{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}};
    CHECK(bbox_iou_3d(point, point) == 1.0);       // identical degenerate boxes
    CHECK(bbox_iou_3d(unit, point) == 0.0);        // zero-volume overlap
}

TEST_CASE("coverage rate agrees with a brute-force nearest neighbor scan") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        PointCloud a = random_cloud(60 + int64_t(rng() % 40), rng, 0.3);
        PointCloud b = random_cloud(60 + int64_t(rng() % 40), rng, 0.3);
        double theta = 0.05 + 0.10 * double(rng() % 100) / 100.0;

        const PointCloud& small = a.size() <= b.size() ? a : b;
        const PointCloud& big = a.size() <= b.size() ? b : a;
        int64_t matched = 0;
        for (int64_t i = 0; i < small.size(); ++i) {
            double best = 1e300;
            for (int64_t j = 0; j < big.size(); ++j)
                best = std::min(best, (small.points.row(i) - big.points.row(j)).norm());
            matched += best < theta;
        }
        double expected = double(matched) / double(small.size());
        CHECK(coverage_rate(a, b, theta) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("coverage rate of a cloud with itself is 1") {
    std::mt19937_64 rng(14);
    PointCloud c = random_cloud(50, rng);
    CHECK(coverage_rate(c, c, 0.01) == 1.0);
}

TEST_CASE("voxel hash neighbor query is exact at the radius boundary") {
    PointCloud c;
    c.points.resize(1, 3);
    c.points << 0.0, 0.0, 0.0;
    VoxelHashGrid grid(c, 0.1);
    CHECK(grid.has_neighbor_within({0.05, 0.0, 0.0}, 0.1));
    CHECK_FALSE(grid.has_neighbor_within({0.1, 0.0, 0.0}, 0.1));  // strict inequality
    CHECK_FALSE(grid.has_neighbor_within({0.2, 0.2, 0.2}, 0.1));
}

TEST_CASE("subsample is deterministic and keeps at most the cap") {
    std::mt19937_64 rng(15);
    PointCloud c = random_cloud(101, rng);
    PointCloud s1 = subsample_cloud(c, 17);
    PointCloud s2 = subsample_cloud(c, 17);
    CHECK(s1.points.rows() <= 17);
    CHECK(s1.points == s2.points);
    PointCloud all = subsample_cloud(c, 1000);
    CHECK(all.points.rows() == 101);
}

TEST_CASE("concat clouds stacks points in argument order") {
    std::mt19937_64 rng(16);
    PointCloud a = random_cloud(3, rng), b = random_cloud(2, rng);
    PointCloud c = concat_clouds({&a, &b});
    CHECK(c.size() == 5);
    CHECK(c.points.topRows(3) == a.points);
    CHECK(c.points.bottomRows(2) == b.points);
}

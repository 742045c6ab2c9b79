#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "openobj/part_features.hpp"

using namespace openobj;

namespace {

Eigen::VectorXf vec3(float a, float b, float c) {
    Eigen::VectorXf v(3);
    v << a, b, c;
    return v;
}

}  // namespace

TEST_CASE("one covering mask copies its embedding, uncovered pixels stay zero") {
    const int H = 2, W = 3;
    std::vector<uint8_t> mask(H * W, 0);
    mask[1] = 1;  // pixel (0,1)
    Eigen::VectorXf f = vec3(0.5f, -0.25f, 1.0f);

    FeatureImage img = composite_feature_image({{&mask, &f}}, H, W, 3);
    CHECK(img.covered(0, 1));
    CHECK(img.at(0, 1).isApprox(f));
    for (int v = 0; v < H; ++v)
        for (int u = 0; u < W; ++u) {
            if (v == 0 && u == 1) continue;
            CHECK_FALSE(img.covered(v, u));
            CHECK(img.at(v, u).norm() == 0.0f);
        }
}

TEST_CASE("overlapping masks average, without renormalization") {
    const int H = 1, W = 2;
    std::vector<uint8_t> both(H * W, 1);
    std::vector<uint8_t> left{1, 0};
    Eigen::VectorXf fa = vec3(1, 0, 0), fb = vec3(0, 1, 0);

    FeatureImage img = composite_feature_image({{&both, &fa}, {&left, &fb}}, H, W, 3);
    // pixel 0: mean of two unit vectors -> norm 1/sqrt(2), not rescaled to 1
    CHECK(img.at(0, 0).isApprox(vec3(0.5f, 0.5f, 0.0f)));
    CHECK(img.at(0, 1).isApprox(fa));
}

TEST_CASE("compositing is invariant to mask order") {
    const int H = 4, W = 4;
    std::mt19937 rng(11);
    std::vector<std::vector<uint8_t>> masks(3, std::vector<uint8_t>(H * W));
    std::vector<Eigen::VectorXf> embs;
    for (int k = 0; k < 3; ++k) {
        for (auto& m : masks[static_cast<size_t>(k)]) m = uint8_t(rng() % 2);
        Eigen::VectorXf e(2);
        e << float(rng() % 7) - 3.0f, float(rng() % 7) - 3.0f;
        embs.push_back(e);
    }
    std::vector<PartMaskView> fwd{{&masks[0], &embs[0]}, {&masks[1], &embs[1]}, {&masks[2], &embs[2]}};
    std::vector<PartMaskView> rev(fwd.rbegin(), fwd.rend());
    FeatureImage a = composite_feature_image(fwd, H, W, 2);
    FeatureImage b = composite_feature_image(rev, H, W, 2);
    CHECK(a.features == b.features);
    CHECK(a.coverage == b.coverage);
}

TEST_CASE("mean of unit embeddings never exceeds unit norm") {
    const int H = 3, W = 3;
    std::mt19937 rng(4);
    std::normal_distribution<float> gauss;
    std::vector<std::vector<uint8_t>> masks(4, std::vector<uint8_t>(H * W));
    std::vector<Eigen::VectorXf> embs;
    for (auto& m : masks)
        for (auto& px : m) px = uint8_t(rng() % 2);
    for (int k = 0; k < 4; ++k) {
        Eigen::VectorXf e(5);
        for (int i = 0; i < 5; ++i) e[i] = gauss(rng);
        embs.push_back(e.normalized());
    }
    std::vector<PartMaskView> parts;
    for (int k = 0; k < 4; ++k) parts.push_back({&masks[static_cast<size_t>(k)], &embs[static_cast<size_t>(k)]});
    FeatureImage img = composite_feature_image(parts, H, W, 5);
    for (int v = 0; v < H; ++v)
        for (int u = 0; u < W; ++u) CHECK(img.at(v, u).norm() <= 1.0f + 1e-6f);
}

TEST_CASE("feature_target reports validity and bounds") {
    std::vector<uint8_t> mask{1, 0};
    Eigen::VectorXf f = vec3(1, 2, 3);
    FeatureImage img = composite_feature_image({{&mask, &f}}, 1, 2, 3);

    FeatureTarget hit = feature_target(img, 0, 0);
    CHECK(hit.valid);
    CHECK(hit.value.isApprox(f));
    CHECK_FALSE(feature_target(img, 0, 1).valid);
    CHECK_THROWS_AS((void)feature_target(img, 1, 0), std::out_of_range);
    CHECK_THROWS_AS((void)feature_target(img, 0, -1), std::out_of_range);
}

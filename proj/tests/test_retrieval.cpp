#include <doctest.h>

#include <vector>

#include "openobj/retrieval.hpp"

using namespace openobj;

namespace {

Eigen::VectorXd unit(int dim, int hot) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v[hot] = 1.0;
    return v;
}

ObjectSummary summary(int id, const Eigen::VectorXd& clip, const Eigen::VectorXd& cap) {
    ObjectSummary s;
    s.object_id = id;
    s.clip = clip;
    s.cap = cap;
    return s;
}

}  // namespace

TEST_CASE("robust mean ignores an orthogonal outlier") {
    std::vector<Eigen::VectorXd> members(9, unit(4, 0));
    members.push_back(unit(4, 1));  // cosine distance 1 to the rest
    Eigen::VectorXd m = robust_mean_embedding(members, 0.15);
    CHECK(m.isApprox(unit(4, 0), 1e-12));
}

TEST_CASE("robust mean of identical members is the member") {
    std::vector<Eigen::VectorXd> members(3, unit(4, 2));
    CHECK(robust_mean_embedding(members, 0.15).isApprox(unit(4, 2), 1e-12));
    CHECK(robust_mean_embedding({unit(4, 1)}, 0.15).isApprox(unit(4, 1), 1e-12));
    CHECK_THROWS((void)robust_mean_embedding({}, 0.15));
}

TEST_CASE("robust mean breaks cluster-size ties toward the lowest member") {
    // two clusters of size 2 each, mutually orthogonal; member 0 is in the first
    std::vector<Eigen::VectorXd> members{unit(4, 0), unit(4, 0), unit(4, 1), unit(4, 1)};
    CHECK(robust_mean_embedding(members, 0.15).isApprox(unit(4, 0), 1e-12));
    std::vector<Eigen::VectorXd> swapped{unit(4, 1), unit(4, 1), unit(4, 0), unit(4, 0)};
    CHECK(robust_mean_embedding(swapped, 0.15).isApprox(unit(4, 1), 1e-12));
}

TEST_CASE("averaged members within tau stay a single cluster") {
    // small perturbations keep cosine distance under tau -> mean of all
    Eigen::VectorXd a = unit(3, 0);
    Eigen::VectorXd b(3), c(3);
    b << 0.99, 0.1, 0.0;
    c << 0.99, 0.0, 0.1;
    b.normalize();
    c.normalize();
    Eigen::VectorXd m = robust_mean_embedding({a, b, c}, 0.15);
    Eigen::VectorXd expect = ((a + b + c) / 3.0).normalized();
    CHECK(m.isApprox(expect, 1e-12));
}

TEST_CASE("query ranks by the best half and breaks ties by id") {
    std::vector<ObjectSummary> sums{summary(0, unit(4, 0), unit(2, 0)),
                                    summary(1, unit(4, 1), unit(2, 1)),
                                    summary(2, unit(4, 1), unit(2, 1))};

    // clip-only query exactly matching object 1's clip: score 1, tie with 2 -> 1 first
    QueryResult r = query_objects(unit(4, 1), std::nullopt, sums);
    REQUIRE(r.ranking.size() == 3);
    CHECK(r.ranking[0].first == 1);
    CHECK(r.ranking[0].second == doctest::Approx(1.0));
    CHECK(r.ranking[1].first == 2);
    CHECK(r.ranking[2].first == 0);

    // caption-only query
    QueryResult rc = query_objects(std::nullopt, unit(2, 0), sums);
    CHECK(rc.ranking[0].first == 0);

    // both halves: score is the max of the two cosines
    QueryResult rb = query_objects(unit(4, 0), unit(2, 1), sums);
    CHECK(rb.ranking[0].second == doctest::Approx(1.0));

    CHECK_THROWS((void)query_objects(std::nullopt, std::nullopt, sums));
}

TEST_CASE("recall_at_k checks the top k entries") {
    QueryResult r;
    r.ranking = {{3, 0.9}, {1, 0.8}, {7, 0.2}};
    CHECK(recall_at_k(r, 3, 1) == 1);
    CHECK(recall_at_k(r, 1, 1) == 0);
    CHECK(recall_at_k(r, 1, 2) == 1);
    CHECK(recall_at_k(r, 7, 2) == 0);
    CHECK(recall_at_k(r, 9, 3) == 0);
}

TEST_CASE("part query scores every surface point and reports the argmax") {
    Eigen::Matrix<double, Eigen::Dynamic, 3> pts(3, 3);
    pts << 0, 0, 0,
           1, 0, 0,
           0, 1, 0;
    Eigen::MatrixXd feats(3, 2);
    feats << 1, 0,
             0.5, 0.5,
             0, 1;
    PartQueryResult r = query_part(unit(2, 1), pts, feats);
    REQUIRE(r.scores.size() == 3);
    CHECK(r.scores[0] == doctest::Approx(0.0));
    CHECK(r.scores[2] == doctest::Approx(1.0));
    CHECK(r.argmax == 2);
    CHECK(r.argmax_point == Eigen::Vector3d(0, 1, 0));

    CHECK_THROWS((void)query_part(unit(2, 0),
                                  Eigen::Matrix<double, Eigen::Dynamic, 3>(0, 3),
                                  Eigen::MatrixXd(0, 2)));
}

TEST_CASE("semantic segmentation takes the argmax label, ties to the lower label") {
    Eigen::MatrixXd feats(3, 2);
    feats << 1, 0,
             0, 1,
             1, 1;  // equal cosine to both labels
    std::vector<Eigen::VectorXd> labels{unit(2, 0), unit(2, 1)};
    std::vector<int> seg = semantic_segment(feats, labels);
    CHECK(seg == std::vector<int>{0, 1, 0});

    // score floor drops weak matches
    std::vector<int> floored = semantic_segment(feats, labels, 0.9);
    CHECK(floored == std::vector<int>{0, 1, -1});
}

TEST_CASE("mIoU and mAcc macro-average over GT-present classes") {
    // gt classes {0,1}; predictions collapse everything to 0
    std::vector<int> gt{0, 0, 1, 1};
    std::vector<int> pred{0, 0, 0, 0};
    auto [miou, macc] = compute_miou_macc(pred, gt, 2);
    // class 0: IoU 2/4, acc 1; class 1: IoU 0, acc 0
    CHECK(miou == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(macc == doctest::Approx(0.5).epsilon(1e-12));

    // perfect prediction
    auto [i2, a2] = compute_miou_macc(gt, gt, 2);
    CHECK(i2 == 1.0);
    CHECK(a2 == 1.0);

    // unlabeled predictions never count as a match
    auto [i3, a3] = compute_miou_macc({-1, -1, -1, -1}, gt, 2);
    CHECK(i3 == 0.0);
    CHECK(a3 == 0.0);

    CHECK_THROWS((void)compute_miou_macc({0}, {0, 1}, 2));
    CHECK_THROWS((void)compute_miou_macc({0, 0}, {0, 5}, 2));
}

#include "openobj/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "openobj/parallel.hpp"

namespace openobj {

namespace {
constexpr int64_t kMaxClusterPoints = 20000;

Cluster build_cluster(const std::vector<MaskDescriptor>& descriptors, std::vector<int> members) {
    std::sort(members.begin(), members.end());
    Cluster c;
    std::vector<const PointCloud*> clouds;
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(96);
    for (int m : members) {
        clouds.push_back(&descriptors[size_t(m)].cloud);
        hist += descriptors[size_t(m)].histogram;
    }
    c.members = std::move(members);
    c.cloud = subsample_cloud(concat_clouds(clouds), kMaxClusterPoints);
    double n = hist.norm();
    c.histogram = n > 0 ? Eigen::VectorXd(hist / n) : hist;
    return c;
}

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(size_t(n)) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[size_t(x)] != x) x = parent[size_t(x)] = parent[size_t(parent[size_t(x)])];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[size_t(std::max(a, b))] = std::min(a, b);
    }
};

}  // namespace

void FineConfig::validate() const {
    if (theta_dist <= 0) throw std::invalid_argument("theta_dist must be > 0");
    if (theta_pc < 0 || theta_pc > 1 || theta_pho < 0 || theta_pho > 1)
        throw std::invalid_argument("theta_pc/theta_pho must be in [0,1]");
}

ClusterSet clusters_from_partition(const std::vector<MaskDescriptor>& descriptors,
                                   const std::vector<int>& community) {
    if (community.size() != descriptors.size())
        throw std::invalid_argument("clusters_from_partition: size mismatch");
    int k = community.empty() ? 0 : *std::max_element(community.begin(), community.end()) + 1;
    std::vector<std::vector<int>> groups(static_cast<size_t>(k));
    for (size_t i = 0; i < community.size(); ++i)
        groups[size_t(community[i])].push_back(int(i));
    ClusterSet set;
    for (auto& g : groups)
        if (!g.empty()) set.clusters.push_back(build_cluster(descriptors, std::move(g)));
    return set;
}

ClusterSet fine_merge(const std::vector<MaskDescriptor>& descriptors, const ClusterSet& coarse,
                      const FineConfig& cfg, int threads) {
    cfg.validate();
    const int n = int(coarse.clusters.size());
    if (n <= 1) return coarse;

    struct Pair {
        int a, b;
        double coverage;
    };
    std::vector<Pair> pairs;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) pairs.push_back({a, b, 0.0});
    parallel_for(int64_t(pairs.size()), threads, [&](int64_t i) {
        auto& p = pairs[size_t(i)];
        p.coverage = coverage_rate(coarse.clusters[size_t(p.a)].cloud,
                                   coarse.clusters[size_t(p.b)].cloud, cfg.theta_dist);
    });
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
        if (x.coverage != y.coverage) return x.coverage > y.coverage;
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });

    DisjointSet ds(n);
    for (const auto& p : pairs) {
        if (p.coverage <= cfg.theta_pc) break;
        double pho = coarse.clusters[size_t(p.a)].histogram.dot(coarse.clusters[size_t(p.b)].histogram);
        if (pho > cfg.theta_pho) ds.unite(p.a, p.b);
    }

    std::vector<std::vector<int>> merged(static_cast<size_t>(n));
    for (int c = 0; c < n; ++c) {
        auto& dst = merged[size_t(ds.find(c))];
        dst.insert(dst.end(), coarse.clusters[size_t(c)].members.begin(),
                   coarse.clusters[size_t(c)].members.end());
    }
    ClusterSet out;
    for (auto& g : merged)
        if (!g.empty()) out.clusters.push_back(build_cluster(descriptors, std::move(g)));
    return out;
}

ClusterSet filter_outliers(const ClusterSet& set, int64_t n_total) {
    int64_t threshold = (n_total + 499) / 500;  // ceil(N/500)
    ClusterSet out;
    for (const auto& c : set.clusters)
        if (int64_t(c.members.size()) >= std::max<int64_t>(threshold, 1)) out.clusters.push_back(c);
    return out;
}

std::vector<ObjectInstance> cluster_pipeline(const Dataset& ds,
                                             const std::vector<MaskDescriptor>& descriptors,
                                             const SimilarityConfig& sim_cfg,
                                             const FineConfig& fine_cfg, uint64_t seed,
                                             int threads, Eigen::MatrixXd* similarity_out) {
    if (descriptors.empty()) throw std::invalid_argument("cluster_pipeline: no descriptors");
    Eigen::MatrixXd S = assemble_similarity(sim_cfg, descriptors, threads);
    if (similarity_out) *similarity_out = S;
    MaskGraph g = build_mask_graph(S, sim_cfg.theta_mask);
    std::vector<int> community = louvain(g, seed);
    ClusterSet coarse = clusters_from_partition(descriptors, community);
    ClusterSet fine = fine_merge(descriptors, coarse, fine_cfg, threads);
    ClusterSet kept = filter_outliers(fine, int64_t(descriptors.size()));

    std::vector<ObjectInstance> objects;
    for (const auto& c : kept.clusters) {
        ObjectInstance o;
        o.id = int(objects.size());
        o.member_indices = c.members;
        for (int m : c.members) o.members.push_back(descriptors[size_t(m)].ref);
        o.cloud = c.cloud;
        o.histogram = c.histogram;
        o.bbox = trimmed_bbox(o.cloud, 0.0);
        objects.push_back(std::move(o));
    }
    return objects;
}

}  // namespace openobj

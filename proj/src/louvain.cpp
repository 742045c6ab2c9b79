#include "openobj/louvain.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace openobj {

namespace {

// One aggregation level. Self-loop weight w_ii contributes 2*w_ii to the
// node degree, matching A_ii = 2*loop in the modularity sums.
struct LevelGraph {
    int n = 0;
    std::vector<WeightedEdge> edges;  // a < b
    std::vector<double> loops;
};

double level_modularity(const LevelGraph& g, const std::vector<int>& comm) {
    std::vector<double> in(size_t(g.n), 0.0), tot(size_t(g.n), 0.0);
    double m2 = 0.0;
    for (const auto& e : g.edges) {
        tot[size_t(e.a)] += e.weight;
        tot[size_t(e.b)] += e.weight;
        m2 += 2.0 * e.weight;
    }
    for (int i = 0; i < g.n; ++i) {
        tot[size_t(i)] += 2.0 * g.loops[size_t(i)];
        m2 += 2.0 * g.loops[size_t(i)];
    }
    if (m2 == 0.0) return 0.0;
    std::vector<double> ctot(size_t(g.n), 0.0), cin(size_t(g.n), 0.0);
    for (int i = 0; i < g.n; ++i) {
        ctot[size_t(comm[size_t(i)])] += tot[size_t(i)];
        cin[size_t(comm[size_t(i)])] += 2.0 * g.loops[size_t(i)];
    }
    for (const auto& e : g.edges)
        if (comm[size_t(e.a)] == comm[size_t(e.b)]) cin[size_t(comm[size_t(e.a)])] += 2.0 * e.weight;
    double q = 0.0;
    for (int c = 0; c < g.n; ++c) q += cin[size_t(c)] / m2 - (ctot[size_t(c)] / m2) * (ctot[size_t(c)] / m2);
    return q;
}

// Local-move phase. Returns the node->community map; throws if a sweep ever
// lowers modularity (the moves are constructed to be non-decreasing).
std::vector<int> one_level(const LevelGraph& g, std::mt19937_64& rng, bool& improved) {
    std::vector<std::vector<std::pair<int, double>>> adj(size_t(g.n));
    for (const auto& e : g.edges) {
        adj[size_t(e.a)].push_back({e.b, e.weight});
        adj[size_t(e.b)].push_back({e.a, e.weight});
    }
    std::vector<double> k(size_t(g.n), 0.0);
    double m2 = 0.0;
    for (int i = 0; i < g.n; ++i) {
        for (const auto& [j, w] : adj[size_t(i)]) k[size_t(i)] += w;
        k[size_t(i)] += 2.0 * g.loops[size_t(i)];
        m2 += k[size_t(i)];
    }
    std::vector<int> comm(size_t(g.n));
    std::iota(comm.begin(), comm.end(), 0);
    improved = false;
    if (m2 == 0.0) return comm;

    std::vector<double> tot = k;
    std::vector<int> order(size_t(g.n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    double q_prev = level_modularity(g, comm);
    bool moved = true;
    while (moved) {
        moved = false;
        for (int i : order) {
            const int old_c = comm[size_t(i)];
            std::unordered_map<int, double> w_to;
            w_to[old_c] += 0.0;
            for (const auto& [j, w] : adj[size_t(i)])
                w_to[comm[size_t(j)]] += w;
            tot[size_t(old_c)] -= k[size_t(i)];
            auto gain = [&](int c) {
                auto it = w_to.find(c);
                double w_ic = it == w_to.end() ? 0.0 : it->second;
                return w_ic - tot[size_t(c)] * k[size_t(i)] / m2;
            };
            int best_c = old_c;
            double best_gain = gain(old_c);
            for (const auto& [c, w] : w_to) {
                double gc = gain(c);
                if (gc > best_gain + 1e-15 || (std::abs(gc - best_gain) <= 1e-15 && c < best_c)) {
                    // among equal gains prefer the lowest community index,
                    // but never move away from old_c on a tie
                    if (gc > best_gain + 1e-15 || best_c != old_c) {
                        best_c = c;
                        best_gain = gc;
                    }
                }
            }
            tot[size_t(best_c)] += k[size_t(i)];
            if (best_c != old_c) {
                comm[size_t(i)] = best_c;
                moved = true;
                improved = true;
            }
        }
        double q_now = level_modularity(g, comm);
        if (q_now < q_prev - 1e-9)
            throw std::logic_error("louvain: modularity decreased within a sweep");
        q_prev = q_now;
    }
    return comm;
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<int>& comm, int n_comm,
                     const std::vector<int>& relabel) {
    LevelGraph out;
    out.n = n_comm;
    out.loops.assign(size_t(n_comm), 0.0);
    std::map<std::pair<int, int>, double> acc;
    for (int i = 0; i < g.n; ++i) out.loops[size_t(relabel[size_t(comm[size_t(i)])])] += g.loops[size_t(i)];
    for (const auto& e : g.edges) {
        int ca = relabel[size_t(comm[size_t(e.a)])];
        int cb = relabel[size_t(comm[size_t(e.b)])];
        if (ca == cb)
            out.loops[size_t(ca)] += e.weight;
        else
            acc[{std::min(ca, cb), std::max(ca, cb)}] += e.weight;
    }
    for (const auto& [key, w] : acc) out.edges.push_back({key.first, key.second, w});
    return out;
}

}  // namespace

double weighted_modularity(const MaskGraph& g, const std::vector<int>& community) {
    if (int(community.size()) != g.node_count)
        throw std::invalid_argument("weighted_modularity: size mismatch");
    LevelGraph lg{g.node_count, g.edges, std::vector<double>(size_t(g.node_count), 0.0)};
    return level_modularity(lg, community);
}

std::vector<int> louvain(const MaskGraph& g, uint64_t seed) {
    std::vector<int> assign(size_t(g.node_count));
    std::iota(assign.begin(), assign.end(), 0);
    if (g.node_count == 0) return {};

    std::mt19937_64 rng(seed);
    LevelGraph level{g.node_count, g.edges, std::vector<double>(size_t(g.node_count), 0.0)};
    double q_prev = level_modularity(level, [&] {
        std::vector<int> id(size_t(level.n));
        std::iota(id.begin(), id.end(), 0);
        return id;
    }());

    while (true) {
        bool improved = false;
        std::vector<int> comm = one_level(level, rng, improved);
        if (!improved) break;

        // renumber level communities by first appearance
        std::vector<int> relabel(size_t(level.n), -1);
        int n_comm = 0;
        for (int i = 0; i < level.n; ++i)
            if (relabel[size_t(comm[size_t(i)])] < 0) relabel[size_t(comm[size_t(i)])] = n_comm++;

        for (int& a : assign) a = relabel[size_t(comm[size_t(a)])];

        double q_now = level_modularity(level, comm);
        if (q_now < q_prev - 1e-9)
            throw std::logic_error("louvain: modularity decreased across a level");
        q_prev = q_now;

        if (n_comm == level.n) break;
        level = aggregate(level, comm, n_comm, relabel);
    }

    // final renumber by first appearance over original nodes
    std::vector<int> relabel(assign.size(), -1);
    int next = 0;
    for (int& a : assign) {
        if (relabel[size_t(a)] < 0) relabel[size_t(a)] = next++;
        a = relabel[size_t(a)];
    }
    return assign;
}

}  // namespace openobj

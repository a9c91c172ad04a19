#pragma once

// Shared test utilities: random typed graphs with an independently kept edge
// list, a from-scratch BFS distance oracle over that edge list, and central
// finite-difference gradient checking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <set>
#include <vector>

#include "ringformer/hin_graph.hpp"
#include "ringformer/tensor.hpp"

namespace testutil {

struct RandomGraph {
    ringformer::HinGraph g;
    // the generator's own record of undirected edges, used by oracles so the
    // checks never read the CSR under test
    std::vector<std::pair<int, int>> edges;
    int n = 0;
    int num_types = 0;
};

inline RandomGraph make_random_typed_graph(int n, int num_types, double edge_prob,
                                           std::uint64_t seed, int d_in = 4,
                                           int label_classes = 0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> type_pick(0, num_types - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::normal_distribution<double> feat(0.0, 1.0);

    std::vector<std::string> type_names;
    for (int t = 0; t < num_types; ++t) type_names.push_back("t" + std::to_string(t));
    ringformer::GraphBuilder b(type_names, {"rel_a", "rel_b"});

    std::vector<int> types(n);
    for (int u = 0; u < n; ++u) {
        // guarantee at least one node of each type so |C| is as requested
        types[u] = u < num_types ? u : type_pick(rng);
        std::vector<float> f(d_in);
        for (auto& v : f) v = static_cast<float>(feat(rng));
        b.add_node(std::to_string(u), types[u], std::move(f));
    }

    RandomGraph out;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (coin(rng) < edge_prob) {
                b.add_edge(u, v, coin(rng) < 0.5 ? 0 : 1);
                out.edges.emplace_back(u, v);
            }

    if (label_classes > 0) {
        std::uniform_int_distribution<int> cls(0, label_classes - 1);
        for (int u = 0; u < n; ++u)
            if (types[u] == 0) b.set_label(u, cls(rng));
    }

    out.g = b.build();
    out.n = n;
    out.num_types = num_types;
    return out;
}

// Plain queue BFS over the independently recorded edge list; -1 = unreachable.
inline std::vector<int> oracle_bfs_distances(int n, const std::vector<std::pair<int, int>>& edges,
                                             int src) {
    std::vector<std::vector<int>> adj(n);
    for (auto [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<int> dist(n, -1);
    dist[src] = 0;
    std::deque<int> q{src};
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int v : adj[u])
            if (dist[v] == -1) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
    }
    return dist;
}

inline double rel_err(double a, double b) {
    const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
    return std::abs(a - b) / denom;
}

// Central finite differences on every element of `param` against the
// already-computed `analytic` gradient. `loss` must recompute the scalar loss
// from scratch. Returns the worst relative error (elements where both sides
// are below `abs_floor` are skipped).
template <typename LossFn>
double fd_check_tensor(ringformer::Tensor<double>& param, const std::vector<double>& analytic,
                       LossFn&& loss, double eps = 1e-5, double abs_floor = 1e-9) {
    double worst = 0.0;
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double orig = param.data()[i];
        param.data()[i] = orig + eps;
        const double lp = loss();
        param.data()[i] = orig - eps;
        const double lm = loss();
        param.data()[i] = orig;
        const double fd = (lp - lm) / (2.0 * eps);
        const double an = analytic[i];
        if (std::abs(fd - an) < abs_floor) continue;
        worst = std::max(worst, rel_err(fd, an));
    }
    return worst;
}

// Runs f under a tape with a fresh output each call; returns (loss value,
// snapshot of param gradient).
template <typename ForwardFn>
std::vector<double> analytic_grad(ringformer::Tensor<double>& param, ForwardFn&& forward) {
    param.set_requires_grad(true);
    param.zero_grad();
    ringformer::Tape<double> tape;
    auto loss = forward(&tape);
    tape.backward(loss);
    return param.grad();
}

}  // namespace testutil

#include "ringformer/synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace ringformer {

namespace {

std::vector<float> pattern(const SyntheticSpec& spec, int cls) {
    std::vector<float> f(spec.d_in, 0.0f);
    f[cls] = static_cast<float>(spec.pattern_scale);
    return f;
}

void add_jitter(std::vector<float>& f, double noise, std::mt19937_64& rng) {
    if (noise <= 0) return;
    std::normal_distribution<double> n(0.0, noise);
    for (auto& v : f) v += static_cast<float>(n(rng));
}

}  // namespace

HinGraph generate_synthetic_hin(const SyntheticSpec& spec) {
    spec.check();
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<int> rand_class(0, spec.classes - 1);

    const bool ring_mode = spec.signal == SyntheticSignal::ring_distance;
    std::vector<std::string> types =
        ring_mode ? std::vector<std::string>{"target", "context"}
                  : std::vector<std::string>{"target", "signal", "anti"};
    GraphBuilder b(types, {"link"});

    // node ids are the dense indices themselves, so downstream label files
    // join directly against embedding exports
    int serial = 0;
    auto fresh_id = [&]() { return std::to_string(serial++); };

    for (int cls = 0; cls < spec.classes; ++cls) {
        for (int i = 0; i < spec.nodes_per_class; ++i) {
            std::vector<float> tf(spec.d_in, 0.0f);
            add_jitter(tf, spec.noise, rng);
            const auto u = b.add_node(fresh_id(), 0, std::move(tf));
            b.set_label(u, cls);

            if (ring_mode) {
                std::int32_t relay = -1;
                for (int r = 0; r < spec.ring1_noise_nodes; ++r) {
                    // class-uninformative: a uniformly chosen palette pattern
                    auto f = pattern(spec, rand_class(rng));
                    add_jitter(f, spec.noise, rng);
                    const auto v = b.add_node(fresh_id(), 1, std::move(f));
                    b.add_edge(u, v, 0);
                    if (relay < 0) relay = v;
                }
                for (int s = 0; s < spec.ring2_signal_nodes; ++s) {
                    auto f = pattern(spec, cls);
                    add_jitter(f, spec.noise, rng);
                    const auto w = b.add_node(fresh_id(), 1, std::move(f));
                    b.add_edge(relay, w, 0);
                }
            } else {
                for (int s = 0; s < spec.signal_type_nodes; ++s) {
                    auto f = pattern(spec, cls);
                    add_jitter(f, spec.noise, rng);
                    b.add_edge(u, b.add_node(fresh_id(), 1, std::move(f)), 0);
                }
                const double anti_scale =
                    static_cast<double>(spec.signal_type_nodes) /
                    static_cast<double>(std::max(1, spec.anti_type_nodes));
                for (int a = 0; a < spec.anti_type_nodes; ++a) {
                    auto f = pattern(spec, cls);
                    for (auto& v : f) v = static_cast<float>(-anti_scale * v);
                    add_jitter(f, spec.noise, rng);
                    b.add_edge(u, b.add_node(fresh_id(), 2, std::move(f)), 0);
                }
            }
        }
    }
    return b.build();
}

int synthetic_self_check(const HinGraph& g, const SyntheticSpec& spec) {
    spec.check();
    const bool ring_mode = spec.signal == SyntheticSignal::ring_distance;
    int mismatches = 0;
    for (auto u : g.nodes_of_type(0)) {
        std::vector<double> acc(spec.d_in, 0.0);
        std::int64_t count = 0;
        if (ring_mode) {
            // mean feature over nodes at distance exactly 2
            std::set<std::int32_t> hop1{u};
            for (auto [v, rel] : g.neighbors(u)) hop1.insert(v);
            std::set<std::int32_t> hop2;
            for (auto [v, rel] : g.neighbors(u))
                for (auto [w, rel2] : g.neighbors(v))
                    if (!hop1.count(w)) hop2.insert(w);
            for (auto w : hop2) {
                const float* f = g.feature_row(w);
                for (int j = 0; j < spec.d_in; ++j) acc[j] += f[j];
                ++count;
            }
        } else {
            // mean feature over designated-type (type 1) direct neighbors
            for (auto [v, rel] : g.neighbors(u)) {
                if (g.node_type[v] != 1) continue;
                const float* f = g.feature_row(v);
                for (int j = 0; j < spec.d_in; ++j) acc[j] += f[j];
                ++count;
            }
        }
        int best = 0;
        for (int c = 1; c < spec.classes; ++c)
            if (acc[c] > acc[best]) best = c;
        if (count == 0 || best != g.labels[u]) ++mismatches;
    }
    return mismatches;
}

}  // namespace ringformer

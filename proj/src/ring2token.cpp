#include "ringformer/ring2token.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <thread>

namespace ringformer {

RingPartition bfs_rings(const HinGraph& g, std::int32_t u, int K) {
    g.check_node(u);
    if (K < 1) throw ValidationError("bfs_rings: K must be >= 1");
    RingPartition p;
    p.target = u;
    p.K = K;
    p.T = g.num_types;
    p.buckets.assign(K + 1, std::vector<std::vector<std::int32_t>>(g.num_types));
    p.buckets[0][g.node_type[u]].push_back(u);

    std::vector<std::int32_t> dist(g.num_nodes, -1);
    dist[u] = 0;
    std::vector<std::int32_t> frontier{u};
    for (int k = 1; k <= K && !frontier.empty(); ++k) {
        std::vector<std::int32_t> next;
        for (std::int32_t v : frontier) {
            for (std::int64_t i = g.adj_offsets[v]; i < g.adj_offsets[v + 1]; ++i) {
                std::int32_t w = g.adj_nodes[i];
                if (dist[w] != -1) continue;
                dist[w] = k;
                next.push_back(w);
                p.buckets[k][g.node_type[w]].push_back(w);
            }
        }
        frontier = std::move(next);
    }
    for (auto& ring : p.buckets)
        for (auto& b : ring) std::sort(b.begin(), b.end());
    return p;
}

namespace {

// Accumulates in double and always in ascending node id, so the stored mean
// is bit-identical regardless of the order members arrive in.
void pool_bucket(const HinGraph& g, std::vector<std::int32_t> members, float* out,
                 int d_in) {
    if (members.empty()) {
        std::fill(out, out + d_in, 0.0f);
        return;
    }
    std::sort(members.begin(), members.end());
    std::vector<double> acc(d_in, 0.0);
    for (std::int32_t v : members) {
        const float* f = g.feature_row(v);
        for (int j = 0; j < d_in; ++j) acc[j] += f[j];
    }
    for (int j = 0; j < d_in; ++j)
        out[j] = static_cast<float>(acc[j] / static_cast<double>(members.size()));
}

TokenTensor make_tokens(std::int64_t target, int K, int T, int d_in) {
    TokenTensor t;
    t.target = target;
    t.K = K;
    t.T = T;
    t.d_in = d_in;
    t.tokens.assign(static_cast<std::size_t>(K + 1) * T * d_in, 0.0f);
    t.occupancy.assign(static_cast<std::size_t>(K + 1) * T, 0);
    t.counts.assign(static_cast<std::size_t>(K + 1) * T, 0);
    return t;
}

}  // namespace

TokenTensor pool_tokens(const HinGraph& g, const RingPartition& p) {
    if (p.T != g.num_types) throw ValidationError("pool_tokens: partition/graph type count mismatch");
    TokenTensor t = make_tokens(p.target, p.K, p.T, g.feat_dim);
    for (int k = 0; k <= p.K; ++k)
        for (int ty = 0; ty < p.T; ++ty) {
            const auto& b = p.bucket(k, ty);
            const std::size_t slot = static_cast<std::size_t>(k) * p.T + ty;
            t.occupancy[slot] = b.empty() ? 0 : 1;
            t.counts[slot] = static_cast<std::uint32_t>(b.size());
            pool_bucket(g, b, t.token(k, ty), g.feat_dim);
        }
    return t;
}

TokenTensor repool_hop_union(const HinGraph& g, const RingPartition& p) {
    TokenTensor t = make_tokens(p.target, 1, p.T, g.feat_dim);
    // ring 0 unchanged
    for (int ty = 0; ty < p.T; ++ty) {
        const auto& b = p.bucket(0, ty);
        t.occupancy[ty] = b.empty() ? 0 : 1;
        t.counts[ty] = static_cast<std::uint32_t>(b.size());
        pool_bucket(g, b, t.token(0, ty), g.feat_dim);
    }
    // pseudo-ring: union over k = 1..K per type; buckets are disjoint so the
    // concatenation is already duplicate-free
    for (int ty = 0; ty < p.T; ++ty) {
        std::vector<std::int32_t> members;
        for (int k = 1; k <= p.K; ++k) {
            const auto& b = p.bucket(k, ty);
            members.insert(members.end(), b.begin(), b.end());
        }
        std::sort(members.begin(), members.end());
        const std::size_t slot = static_cast<std::size_t>(p.T) + ty;
        t.occupancy[slot] = members.empty() ? 0 : 1;
        t.counts[slot] = static_cast<std::uint32_t>(members.size());
        pool_bucket(g, members, t.token(1, ty), g.feat_dim);
    }
    return t;
}

TokenTensor repool_type_mixed(const HinGraph& g, const RingPartition& p) {
    TokenTensor t = make_tokens(p.target, p.K, 1, g.feat_dim);
    for (int k = 0; k <= p.K; ++k) {
        std::vector<std::int32_t> members;
        for (int ty = 0; ty < p.T; ++ty) {
            const auto& b = p.bucket(k, ty);
            members.insert(members.end(), b.begin(), b.end());
        }
        std::sort(members.begin(), members.end());
        t.occupancy[k] = members.empty() ? 0 : 1;
        t.counts[k] = static_cast<std::uint32_t>(members.size());
        pool_bucket(g, members, t.token(k, 0), g.feat_dim);
    }
    return t;
}

namespace {

constexpr char kCacheMagic[4] = {'R', '2', 'T', '1'};

std::size_t bitmap_bytes(int K, int T) {
    return (static_cast<std::size_t>(K + 1) * T + 7) / 8;
}

void write_entry(std::ofstream& out, const TokenTensor& t) {
    std::uint64_t id = static_cast<std::uint64_t>(t.target);
    out.write(reinterpret_cast<const char*>(&id), 8);
    std::vector<std::uint8_t> bits(bitmap_bytes(t.K, t.T), 0);
    for (std::size_t i = 0; i < t.occupancy.size(); ++i)
        if (t.occupancy[i]) bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    out.write(reinterpret_cast<const char*>(bits.data()),
              static_cast<std::streamsize>(bits.size()));
    out.write(reinterpret_cast<const char*>(t.tokens.data()),
              static_cast<std::streamsize>(t.tokens.size() * sizeof(float)));
}

}  // namespace

TokenCache precompute_all(const HinGraph& g, int K, const std::string& cache_path,
                          const PrecomputeOptions& opts) {
    if (K < 1) throw ValidationError("precompute_all: K must be >= 1");
    std::vector<std::int32_t> nodes;
    if (opts.all_nodes) {
        nodes.resize(g.num_nodes);
        for (std::int64_t u = 0; u < g.num_nodes; ++u)
            nodes[u] = static_cast<std::int32_t>(u);
    } else {
        if (g.target_type < 0)
            throw ValidationError("precompute_all: graph has no labeled target type; "
                                  "use all-nodes mode");
        nodes = g.nodes_of_type(g.target_type);
    }

    std::vector<TokenTensor> entries(nodes.size());
    const int threads = std::max(1, opts.threads);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            entries[i] = pool_tokens(g, bfs_rings(g, nodes[i], K));
    };
    if (threads == 1 || nodes.size() < 2) {
        work(0, nodes.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (nodes.size() + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            std::size_t b = std::min(nodes.size(), t * chunk);
            std::size_t e = std::min(nodes.size(), b + chunk);
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }

    TokenCache cache;
    cache.header.K = static_cast<std::uint32_t>(K);
    cache.header.T = static_cast<std::uint32_t>(g.num_types);
    cache.header.d_in = static_cast<std::uint32_t>(g.feat_dim);
    cache.header.count = entries.size();
    cache.header.graph_fingerprint = g.fingerprint();

    std::ofstream out(cache_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + cache_path);
    out.write(kCacheMagic, 4);
    out.write(reinterpret_cast<const char*>(&cache.header.K), 4);
    out.write(reinterpret_cast<const char*>(&cache.header.T), 4);
    out.write(reinterpret_cast<const char*>(&cache.header.d_in), 4);
    out.write(reinterpret_cast<const char*>(&cache.header.count), 8);
    out.write(reinterpret_cast<const char*>(&cache.header.graph_fingerprint), 8);
    for (const auto& e : entries) write_entry(out, e);
    if (!out) throw IoError("failed writing " + cache_path);

    cache.entries = std::move(entries);
    for (std::size_t i = 0; i < cache.entries.size(); ++i)
        cache.index.emplace(cache.entries[i].target, i);
    return cache;
}

TokenCache load_token_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kCacheMagic, 4) != 0)
        throw ParseError(path + ": bad magic, not a token cache");
    TokenCache cache;
    in.read(reinterpret_cast<char*>(&cache.header.K), 4);
    in.read(reinterpret_cast<char*>(&cache.header.T), 4);
    in.read(reinterpret_cast<char*>(&cache.header.d_in), 4);
    in.read(reinterpret_cast<char*>(&cache.header.count), 8);
    in.read(reinterpret_cast<char*>(&cache.header.graph_fingerprint), 8);
    if (!in) throw ParseError(path + ": truncated header");

    const int K = static_cast<int>(cache.header.K);
    const int T = static_cast<int>(cache.header.T);
    const int d_in = static_cast<int>(cache.header.d_in);
    const std::size_t nbits = bitmap_bytes(K, T);
    cache.entries.reserve(cache.header.count);
    for (std::uint64_t i = 0; i < cache.header.count; ++i) {
        TokenTensor t = make_tokens(0, K, T, d_in);
        std::uint64_t id = 0;
        in.read(reinterpret_cast<char*>(&id), 8);
        t.target = static_cast<std::int64_t>(id);
        std::vector<std::uint8_t> bits(nbits, 0);
        in.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(nbits));
        for (std::size_t j = 0; j < t.occupancy.size(); ++j)
            t.occupancy[j] = (bits[j / 8] >> (j % 8)) & 1u;
        in.read(reinterpret_cast<char*>(t.tokens.data()),
                static_cast<std::streamsize>(t.tokens.size() * sizeof(float)));
        if (!in) throw ParseError(path + ": truncated at entry " + std::to_string(i));
        t.counts.clear();  // not serialized
        cache.index.emplace(t.target, cache.entries.size());
        cache.entries.push_back(std::move(t));
    }
    return cache;
}

void check_cache_matches(const TokenCache& cache, const HinGraph& g, int K) {
    std::string diffs;
    if (static_cast<int>(cache.header.K) != K)
        diffs += " K(cache=" + std::to_string(cache.header.K) +
                 ", config=" + std::to_string(K) + ")";
    if (static_cast<int>(cache.header.T) != g.num_types)
        diffs += " T(cache=" + std::to_string(cache.header.T) +
                 ", graph=" + std::to_string(g.num_types) + ")";
    if (static_cast<int>(cache.header.d_in) != g.feat_dim)
        diffs += " d_in(cache=" + std::to_string(cache.header.d_in) +
                 ", graph=" + std::to_string(g.feat_dim) + ")";
    if (cache.header.graph_fingerprint != g.fingerprint())
        diffs += " graph_fingerprint";
    if (!diffs.empty())
        throw ValidationError("token cache does not match:" + diffs);
}

}  // namespace ringformer

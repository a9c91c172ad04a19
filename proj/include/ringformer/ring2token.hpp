#pragma once

// Ring2Token preprocessing: partition each node's K-hop neighborhood into
// distance-exact rings sub-bucketed by node type, then mean-pool features
// into fixed-shape token tensors. Empty buckets are zero-filled.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ringformer/hin_graph.hpp"

namespace ringformer {

struct RingPartition {
    std::int32_t target = -1;
    int K = 0;
    int T = 0;
    // buckets[k][t]: node ids at distance exactly k with type t, ascending.
    std::vector<std::vector<std::vector<std::int32_t>>> buckets;

    const std::vector<std::int32_t>& bucket(int k, int t) const { return buckets[k][t]; }
    std::int64_t total_members() const {
        std::int64_t n = 0;
        for (const auto& ring : buckets)
            for (const auto& b : ring) n += static_cast<std::int64_t>(b.size());
        return n;
    }
};

// Frontier-by-frontier BFS over the undirected adjacency; nodes at distance
// > K are omitted. Ring 0 is {u} in the bucket of u's own type.
RingPartition bfs_rings(const HinGraph& g, std::int32_t u, int K);

struct TokenTensor {
    std::int64_t target = -1;
    int K = 0;
    int T = 0;
    int d_in = 0;
    std::vector<float> tokens;            // (K+1) x T x d_in, row-major
    std::vector<std::uint8_t> occupancy;  // (K+1) x T, 1 = non-empty bucket
    std::vector<std::uint32_t> counts;    // member counts; in-memory only

    float* token(int k, int t) {
        return tokens.data() + (static_cast<std::size_t>(k) * T + t) * d_in;
    }
    const float* token(int k, int t) const {
        return tokens.data() + (static_cast<std::size_t>(k) * T + t) * d_in;
    }
    bool occupied(int k, int t) const {
        return occupancy[static_cast<std::size_t>(k) * T + t] != 0;
    }
};

// Per-bucket arithmetic mean of member features, accumulated in double and
// stored as f32; members are iterated in ascending node id.
TokenTensor pool_tokens(const HinGraph& g, const RingPartition& p);

// w/o-Ring input: one pseudo-ring holding the per-type mean over the union of
// rings 1..K (the classic K-hop neighborhood). Output shape 2 x T x d_in.
TokenTensor repool_hop_union(const HinGraph& g, const RingPartition& p);

// w/o-Type input: one bucket per ring mixing all types. Output (K+1) x 1 x d_in.
TokenTensor repool_type_mixed(const HinGraph& g, const RingPartition& p);

// ---------------------------------------------------------------------------
// token cache (binary, versioned via magic "R2T1")
//
//   magic "R2T1"
//   u32 K, u32 T, u32 d_in, u64 count, u64 graph_fingerprint
//   per node: u64 node id, occupancy bitmap (LSB-first, ceil((K+1)*T/8)
//   bytes), f32 tokens row-major
// ---------------------------------------------------------------------------

struct TokenCacheHeader {
    std::uint32_t K = 0;
    std::uint32_t T = 0;
    std::uint32_t d_in = 0;
    std::uint64_t count = 0;
    std::uint64_t graph_fingerprint = 0;
};

struct TokenCache {
    TokenCacheHeader header;
    std::vector<TokenTensor> entries;  // ascending node id
    std::unordered_map<std::int64_t, std::size_t> index;

    const TokenTensor& at(std::int64_t node) const {
        auto it = index.find(node);
        if (it == index.end())
            throw ValidationError("token cache has no entry for node " + std::to_string(node));
        return entries[it->second];
    }
    bool contains(std::int64_t node) const { return index.count(node) != 0; }
};

struct PrecomputeOptions {
    bool all_nodes = false;  // default: target-type nodes only
    int threads = 1;
};

// Computes TokenTensors for the selected nodes and writes the cache file.
// Deterministic: identical inputs produce a byte-identical file.
TokenCache precompute_all(const HinGraph& g, int K, const std::string& cache_path,
                          const PrecomputeOptions& opts = {});

TokenCache load_token_cache(const std::string& path);

// Throws ValidationError naming the differing fields when the cache does not
// match the graph/K it is used with.
void check_cache_matches(const TokenCache& cache, const HinGraph& g, int K);

}  // namespace ringformer

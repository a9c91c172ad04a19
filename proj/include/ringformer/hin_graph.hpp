#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ringformer/common.hpp"

namespace ringformer {

struct LoadOptions {
    bool allow_self_loops = false;
};

// Immutable after construction; safe for concurrent reads.
struct HinGraph {
    std::int64_t num_nodes = 0;
    int num_types = 0;      // |C|, the declared type universe
    int num_relations = 0;  // |R|

    std::vector<std::int32_t> node_type;  // per node, in [0, num_types)

    // Undirected edges stored as symmetric CSR arcs, each row sorted by
    // neighbor id. adj_rel carries the relation id per arc.
    std::vector<std::int64_t> adj_offsets;  // num_nodes + 1
    std::vector<std::int32_t> adj_nodes;
    std::vector<std::int32_t> adj_rel;

    int feat_dim = 0;
    std::vector<float> features;  // num_nodes x feat_dim, row-major

    std::vector<std::int32_t> labels;  // -1 = unlabeled
    int num_classes = 0;
    int target_type = -1;  // type shared by all labeled nodes; -1 when unlabeled

    std::vector<std::string> type_names;
    std::vector<std::string> relation_names;
    std::vector<std::string> node_ids;  // original ids, sidecar for diagnostics

    bool allow_self_loops = false;

    std::int64_t num_undirected_edges() const {
        return static_cast<std::int64_t>(adj_nodes.size()) / 2 +
               static_cast<std::int64_t>(self_loop_count_);
    }

    const float* feature_row(std::int32_t u) const {
        return features.data() + static_cast<std::size_t>(u) * feat_dim;
    }

    std::pair<std::int64_t, std::int64_t> neighbor_range(std::int32_t u) const {
        check_node(u);
        return {adj_offsets[u], adj_offsets[u + 1]};
    }

    // All adjacent (node, relation) pairs in ascending node order.
    std::vector<std::pair<std::int32_t, std::int32_t>> neighbors(std::int32_t u) const;

    std::vector<std::int64_t> type_histogram() const;
    std::vector<std::int32_t> labeled_nodes() const;
    std::vector<std::int32_t> nodes_of_type(int t) const;

    std::uint64_t fingerprint() const;

    // Throws ValidationError on the first violated invariant.
    void validate() const;

    void check_node(std::int32_t u) const {
        if (u < 0 || u >= num_nodes) throw ValidationError("node id out of range");
    }

    // set by the builder; self-loops count once in num_undirected_edges
    std::int64_t self_loop_count_ = 0;
};

// Incremental construction; used by the loader, the synthetic generator and
// tests. Duplicate undirected edges are collapsed (first relation wins).
class GraphBuilder {
public:
    GraphBuilder(std::vector<std::string> type_names,
                 std::vector<std::string> relation_names);

    std::int32_t add_node(std::string id, int type, std::vector<float> feature);
    void add_edge(std::int32_t u, std::int32_t v, int relation);
    void set_label(std::int32_t u, int cls);

    std::int64_t duplicate_edges_collapsed() const { return dup_edges_; }

    HinGraph build(bool allow_self_loops = false);

private:
    std::vector<std::string> type_names_;
    std::vector<std::string> relation_names_;
    std::vector<std::string> node_ids_;
    std::vector<std::int32_t> node_type_;
    std::vector<float> features_;
    int feat_dim_ = -1;
    std::vector<std::int32_t> labels_;
    struct EdgeRec {
        std::int32_t u, v;
        std::int32_t rel;
    };
    std::vector<EdgeRec> edges_;
    std::int64_t dup_edges_ = 0;
};

// File ingestion. Formats (all CSV files have a header row; '#' lines are
// comments, with optional `# types: name=count,...` / `# relations: ...`
// declarations):
//   node file:    node_id,type_name
//   edge file:    src,dst,relation_name
//   label file:   node_id,class_id
//   feature file: CSV `node_id,f0,f1,...`, or binary: magic "RFB1",
//                 u32 num_nodes, u32 feat_dim, f32 row-major in node order.
HinGraph load_graph(const std::string& node_file, const std::string& edge_file,
                    const std::string& feature_file, const std::string& label_file,
                    const LoadOptions& opts = {}, std::ostream* log = nullptr);

// Conventional directory layout: nodes.csv, edges.csv,
// features.bin | features.csv, labels.csv.
HinGraph load_graph_dir(const std::string& dir, const LoadOptions& opts = {},
                        std::ostream* log = nullptr);

void save_graph(const HinGraph& g, const std::string& dir,
                bool binary_features = true);

}  // namespace ringformer

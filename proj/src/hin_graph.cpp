#include "ringformer/hin_graph.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace ringformer {

namespace {

constexpr char kFeatureMagic[4] = {'R', 'F', 'B', '1'};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

[[noreturn]] void parse_fail(const std::string& file, std::size_t line_no,
                             const std::string& what) {
    throw ParseError(file + ":" + std::to_string(line_no) + ": " + what);
}

// Reads `# key: name=count,name=count` declarations; returns name -> count.
bool parse_declaration(const std::string& line, const std::string& key,
                       std::vector<std::pair<std::string, std::int64_t>>& out) {
    std::string body = trim(line.substr(1));
    const std::string prefix = key + ":";
    if (body.rfind(prefix, 0) != 0) return false;
    body = trim(body.substr(prefix.size()));
    if (body.empty()) return true;
    for (const auto& item : split_csv(body)) {
        auto eq = item.find('=');
        if (eq == std::string::npos) return false;
        out.emplace_back(trim(item.substr(0, eq)),
                         std::stoll(trim(item.substr(eq + 1))));
    }
    return true;
}

struct CsvReader {
    explicit CsvReader(const std::string& path) : path_(path), in_(path) {
        if (!in_) throw IoError("cannot open " + path);
    }

    // Returns false at EOF. Skips blank lines; collects '#' declarations.
    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            std::string t = trim(line);
            if (t.empty()) continue;
            if (t[0] == '#') {
                comments.push_back(t);
                continue;
            }
            if (!header_seen_) {
                header_seen_ = true;
                header = split_csv(t);
                continue;
            }
            fields = split_csv(t);
            return true;
        }
        if (!header_seen_) throw ParseError(path_ + ": missing header row");
        return false;
    }

    std::size_t line_no() const { return line_no_; }
    const std::string& path() const { return path_; }

    std::vector<std::string> header;
    std::vector<std::string> comments;

private:
    std::string path_;
    std::ifstream in_;
    std::size_t line_no_ = 0;
    bool header_seen_ = false;
};

long parse_int(const CsvReader& r, const std::string& s) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        parse_fail(r.path(), r.line_no(), "expected integer, got '" + s + "'");
    }
}

float parse_float(const CsvReader& r, const std::string& s) {
    try {
        std::size_t pos = 0;
        float v = std::stof(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        parse_fail(r.path(), r.line_no(), "expected real number, got '" + s + "'");
    }
}

}  // namespace

std::vector<std::pair<std::int32_t, std::int32_t>> HinGraph::neighbors(
    std::int32_t u) const {
    auto [b, e] = neighbor_range(u);
    std::vector<std::pair<std::int32_t, std::int32_t>> out;
    out.reserve(e - b);
    for (std::int64_t i = b; i < e; ++i) out.emplace_back(adj_nodes[i], adj_rel[i]);
    return out;
}

std::vector<std::int64_t> HinGraph::type_histogram() const {
    std::vector<std::int64_t> h(num_types, 0);
    for (auto t : node_type) ++h[t];
    return h;
}

std::vector<std::int32_t> HinGraph::labeled_nodes() const {
    std::vector<std::int32_t> out;
    for (std::int64_t u = 0; u < num_nodes; ++u)
        if (labels[u] >= 0) out.push_back(static_cast<std::int32_t>(u));
    return out;
}

std::vector<std::int32_t> HinGraph::nodes_of_type(int t) const {
    std::vector<std::int32_t> out;
    for (std::int64_t u = 0; u < num_nodes; ++u)
        if (node_type[u] == t) out.push_back(static_cast<std::int32_t>(u));
    return out;
}

std::uint64_t HinGraph::fingerprint() const {
    std::uint64_t h = fnv1a64_u64(static_cast<std::uint64_t>(num_nodes), 0xcbf29ce484222325ull);
    h = fnv1a64_u64(static_cast<std::uint64_t>(num_types), h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(num_relations), h);
    h = fnv1a64_vec(node_type, h);
    h = fnv1a64_vec(adj_offsets, h);
    h = fnv1a64_vec(adj_nodes, h);
    h = fnv1a64_vec(adj_rel, h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(feat_dim), h);
    h = fnv1a64_vec(features, h);
    h = fnv1a64_vec(labels, h);
    for (const auto& s : type_names) h = fnv1a64_str(s, h);
    for (const auto& s : relation_names) h = fnv1a64_str(s, h);
    return h;
}

void HinGraph::validate() const {
    if (static_cast<std::int64_t>(node_type.size()) != num_nodes)
        throw ValidationError("node_type size mismatch");
    for (auto t : node_type)
        if (t < 0 || t >= num_types) throw ValidationError("node type id out of range");
    if (num_types + num_relations <= 2)
        throw ValidationError("heterogeneity requires |C| + |R| > 2 (got " +
                              std::to_string(num_types) + " types, " +
                              std::to_string(num_relations) + " relations)");
    if (static_cast<std::int64_t>(adj_offsets.size()) != num_nodes + 1)
        throw ValidationError("adjacency offsets size mismatch");
    if (adj_nodes.size() != adj_rel.size())
        throw ValidationError("adjacency relation array size mismatch");
    for (std::int64_t u = 0; u < num_nodes; ++u) {
        for (std::int64_t i = adj_offsets[u]; i < adj_offsets[u + 1]; ++i) {
            std::int32_t v = adj_nodes[i];
            if (v < 0 || v >= num_nodes)
                throw ValidationError("dangling edge endpoint " + std::to_string(v));
            if (v == u && !allow_self_loops)
                throw ValidationError("self-loop at node " + std::to_string(u) +
                                      " (pass --allow-self-loops to accept)");
            if (i > adj_offsets[u] && adj_nodes[i - 1] >= v)
                throw ValidationError("adjacency row not strictly sorted (duplicate edge?)");
            if (adj_rel[i] < 0 || adj_rel[i] >= num_relations)
                throw ValidationError("relation id out of range");
            // undirectedness: the mirror arc must exist with the same relation
            auto b = adj_nodes.begin() + adj_offsets[v];
            auto e = adj_nodes.begin() + adj_offsets[v + 1];
            auto it = std::lower_bound(b, e, static_cast<std::int32_t>(u));
            if (it == e || *it != u)
                throw ValidationError("missing mirror arc for edge " + std::to_string(u) +
                                      "-" + std::to_string(v));
            if (adj_rel[it - adj_nodes.begin()] != adj_rel[i])
                throw ValidationError("mirror arc relation mismatch");
        }
    }
    if (static_cast<std::int64_t>(features.size()) !=
        num_nodes * static_cast<std::int64_t>(feat_dim))
        throw ValidationError("feature matrix size mismatch");
    if (static_cast<std::int64_t>(labels.size()) != num_nodes)
        throw ValidationError("label array size mismatch");
    int tt = -1;
    for (std::int64_t u = 0; u < num_nodes; ++u) {
        if (labels[u] < 0) continue;
        if (labels[u] >= num_classes) throw ValidationError("label class id out of range");
        if (tt == -1) tt = node_type[u];
        if (node_type[u] != tt)
            throw ValidationError("labeled nodes span multiple types; expected a single target type");
    }
    if (tt != target_type) throw ValidationError("target type inconsistent with labels");
}

GraphBuilder::GraphBuilder(std::vector<std::string> type_names,
                           std::vector<std::string> relation_names)
    : type_names_(std::move(type_names)), relation_names_(std::move(relation_names)) {}

std::int32_t GraphBuilder::add_node(std::string id, int type, std::vector<float> feature) {
    if (type < 0 || type >= static_cast<int>(type_names_.size()))
        throw ValidationError("add_node: unknown type id");
    if (feat_dim_ < 0) feat_dim_ = static_cast<int>(feature.size());
    if (static_cast<int>(feature.size()) != feat_dim_)
        throw ValidationError("add_node: feature dimension mismatch (expected " +
                              std::to_string(feat_dim_) + ", got " +
                              std::to_string(feature.size()) + ")");
    node_ids_.push_back(std::move(id));
    node_type_.push_back(type);
    features_.insert(features_.end(), feature.begin(), feature.end());
    labels_.push_back(-1);
    return static_cast<std::int32_t>(node_ids_.size() - 1);
}

void GraphBuilder::add_edge(std::int32_t u, std::int32_t v, int relation) {
    auto n = static_cast<std::int32_t>(node_ids_.size());
    if (u < 0 || u >= n || v < 0 || v >= n)
        throw ValidationError("add_edge: endpoint out of range");
    if (relation < 0 || relation >= static_cast<int>(relation_names_.size()))
        throw ValidationError("add_edge: unknown relation id");
    edges_.push_back({u, v, relation});
}

void GraphBuilder::set_label(std::int32_t u, int cls) {
    if (u < 0 || u >= static_cast<std::int32_t>(node_ids_.size()))
        throw ValidationError("set_label: node out of range");
    if (cls < 0) throw ValidationError("set_label: negative class id");
    labels_[u] = cls;
}

HinGraph GraphBuilder::build(bool allow_self_loops) {
    HinGraph g;
    g.num_nodes = static_cast<std::int64_t>(node_ids_.size());
    g.num_types = static_cast<int>(type_names_.size());
    g.num_relations = static_cast<int>(relation_names_.size());
    g.type_names = type_names_;
    g.relation_names = relation_names_;
    g.node_ids = std::move(node_ids_);
    g.node_type = std::move(node_type_);
    g.feat_dim = std::max(feat_dim_, 0);
    g.features = std::move(features_);
    g.labels = std::move(labels_);
    g.allow_self_loops = allow_self_loops;

    // canonicalize: each undirected edge once with u <= v, dedup on endpoints
    for (auto& e : edges_)
        if (e.u > e.v) std::swap(e.u, e.v);
    std::stable_sort(edges_.begin(), edges_.end(), [](const EdgeRec& a, const EdgeRec& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    std::vector<EdgeRec> uniq;
    uniq.reserve(edges_.size());
    for (const auto& e : edges_) {
        if (!uniq.empty() && uniq.back().u == e.u && uniq.back().v == e.v) {
            ++dup_edges_;
            continue;
        }
        uniq.push_back(e);
    }

    std::vector<std::int64_t> deg(g.num_nodes, 0);
    std::int64_t self_loops = 0;
    for (const auto& e : uniq) {
        if (e.u == e.v) {
            ++deg[e.u];
            ++self_loops;
        } else {
            ++deg[e.u];
            ++deg[e.v];
        }
    }
    g.self_loop_count_ = self_loops;
    g.adj_offsets.assign(g.num_nodes + 1, 0);
    for (std::int64_t u = 0; u < g.num_nodes; ++u)
        g.adj_offsets[u + 1] = g.adj_offsets[u] + deg[u];
    g.adj_nodes.assign(g.adj_offsets.back(), 0);
    g.adj_rel.assign(g.adj_offsets.back(), 0);
    std::vector<std::int64_t> cursor(g.adj_offsets.begin(), g.adj_offsets.end() - 1);
    auto put = [&](std::int32_t a, std::int32_t b, std::int32_t rel) {
        g.adj_nodes[cursor[a]] = b;
        g.adj_rel[cursor[a]] = rel;
        ++cursor[a];
    };
    for (const auto& e : uniq) {
        put(e.u, e.v, e.rel);
        if (e.u != e.v) put(e.v, e.u, e.rel);
    }
    for (std::int64_t u = 0; u < g.num_nodes; ++u) {
        // sort each row by (node, rel); rel is unique per pair after dedup
        std::vector<std::pair<std::int32_t, std::int32_t>> row;
        for (std::int64_t i = g.adj_offsets[u]; i < g.adj_offsets[u + 1]; ++i)
            row.emplace_back(g.adj_nodes[i], g.adj_rel[i]);
        std::sort(row.begin(), row.end());
        for (std::int64_t i = g.adj_offsets[u]; i < g.adj_offsets[u + 1]; ++i) {
            g.adj_nodes[i] = row[i - g.adj_offsets[u]].first;
            g.adj_rel[i] = row[i - g.adj_offsets[u]].second;
        }
    }

    int num_classes = 0;
    int target_type = -1;
    for (std::int64_t u = 0; u < g.num_nodes; ++u) {
        if (g.labels[u] < 0) continue;
        num_classes = std::max(num_classes, g.labels[u] + 1);
        if (target_type == -1) target_type = g.node_type[u];
    }
    g.num_classes = num_classes;
    g.target_type = target_type;

    g.validate();
    return g;
}

HinGraph load_graph(const std::string& node_file, const std::string& edge_file,
                    const std::string& feature_file, const std::string& label_file,
                    const LoadOptions& opts, std::ostream* log) {
    // --- nodes ---
    CsvReader nodes(node_file);
    std::vector<std::string> ids;
    std::vector<std::string> node_type_name;
    std::unordered_map<std::string, std::int32_t> id_index;
    std::unordered_map<std::string, int> type_index;
    std::vector<std::string> type_names;
    auto intern_type = [&](const std::string& name) {
        auto it = type_index.find(name);
        if (it != type_index.end()) return it->second;
        int t = static_cast<int>(type_names.size());
        type_names.push_back(name);
        type_index.emplace(name, t);
        return t;
    };
    std::vector<std::string> fields;
    std::vector<std::pair<std::string, std::string>> node_rows;
    while (nodes.next(fields)) {
        if (fields.size() != 2)
            parse_fail(node_file, nodes.line_no(), "expected node_id,type_name");
        if (!id_index.emplace(fields[0], static_cast<std::int32_t>(node_rows.size())).second)
            parse_fail(node_file, nodes.line_no(), "duplicate node id '" + fields[0] + "'");
        node_rows.emplace_back(fields[0], fields[1]);
    }
    // a declared type universe pins the id order and may introduce types with
    // zero nodes; observed extras follow in file order
    std::vector<std::pair<std::string, std::int64_t>> declared_types;
    for (const auto& c : nodes.comments) parse_declaration(c, "types", declared_types);
    for (const auto& [name, count] : declared_types) intern_type(name);
    for (auto& [id, type_name] : node_rows) {
        ids.push_back(id);
        node_type_name.push_back(type_name);
        intern_type(type_name);
    }

    // --- edges ---
    CsvReader edges(edge_file);
    std::unordered_map<std::string, int> rel_index;
    std::vector<std::string> relation_names;
    auto intern_rel = [&](const std::string& name) {
        auto it = rel_index.find(name);
        if (it != rel_index.end()) return it->second;
        int r = static_cast<int>(relation_names.size());
        relation_names.push_back(name);
        rel_index.emplace(name, r);
        return r;
    };
    struct RawEdge {
        std::int32_t u, v;
        std::string rel;
        std::size_t line;
    };
    std::vector<RawEdge> edge_rows;
    while (edges.next(fields)) {
        if (fields.size() != 3)
            parse_fail(edge_file, edges.line_no(), "expected src,dst,relation_name");
        auto iu = id_index.find(fields[0]);
        auto iv = id_index.find(fields[1]);
        if (iu == id_index.end())
            throw ValidationError(edge_file + ":" + std::to_string(edges.line_no()) +
                                  ": dangling endpoint '" + fields[0] + "'");
        if (iv == id_index.end())
            throw ValidationError(edge_file + ":" + std::to_string(edges.line_no()) +
                                  ": dangling endpoint '" + fields[1] + "'");
        edge_rows.push_back({iu->second, iv->second, fields[2], edges.line_no()});
    }
    std::vector<std::pair<std::string, std::int64_t>> declared_rels;
    for (const auto& c : edges.comments) parse_declaration(c, "relations", declared_rels);
    for (const auto& [name, count] : declared_rels) intern_rel(name);
    struct Edge {
        std::int32_t u, v;
        int rel;
    };
    std::vector<Edge> raw_edges;
    raw_edges.reserve(edge_rows.size());
    for (auto& e : edge_rows) raw_edges.push_back({e.u, e.v, intern_rel(e.rel)});

    // --- features ---
    const std::int64_t num_nodes = static_cast<std::int64_t>(ids.size());
    int feat_dim = 0;
    std::vector<float> feats;
    {
        std::ifstream fin(feature_file, std::ios::binary);
        if (!fin) throw IoError("cannot open " + feature_file);
        char magic[4] = {};
        fin.read(magic, 4);
        if (fin.gcount() == 4 && std::memcmp(magic, kFeatureMagic, 4) == 0) {
            std::uint32_t nv = 0, dim = 0;
            fin.read(reinterpret_cast<char*>(&nv), 4);
            fin.read(reinterpret_cast<char*>(&dim), 4);
            if (!fin) throw ParseError(feature_file + ": truncated header");
            if (static_cast<std::int64_t>(nv) != num_nodes)
                throw ValidationError(feature_file + ": header declares " +
                                      std::to_string(nv) + " rows, node file has " +
                                      std::to_string(num_nodes));
            feat_dim = static_cast<int>(dim);
            feats.resize(static_cast<std::size_t>(num_nodes) * feat_dim);
            fin.read(reinterpret_cast<char*>(feats.data()),
                     static_cast<std::streamsize>(feats.size() * sizeof(float)));
            if (fin.gcount() != static_cast<std::streamsize>(feats.size() * sizeof(float)))
                throw ParseError(feature_file + ": truncated feature matrix");
        } else {
            fin.close();
            CsvReader fr(feature_file);
            std::vector<bool> seen(num_nodes, false);
            std::int64_t rows = 0;
            while (fr.next(fields)) {
                if (fields.size() < 2)
                    parse_fail(feature_file, fr.line_no(), "expected node_id,f0,...");
                auto it = id_index.find(fields[0]);
                if (it == id_index.end())
                    throw ValidationError(feature_file + ":" + std::to_string(fr.line_no()) +
                                          ": unknown node id '" + fields[0] + "'");
                int dim = static_cast<int>(fields.size()) - 1;
                if (feat_dim == 0) {
                    feat_dim = dim;
                    feats.assign(static_cast<std::size_t>(num_nodes) * feat_dim, 0.0f);
                } else if (dim != feat_dim) {
                    throw ValidationError(feature_file + ":" + std::to_string(fr.line_no()) +
                                          ": feature dimension mismatch (expected " +
                                          std::to_string(feat_dim) + ", got " +
                                          std::to_string(dim) + ")");
                }
                if (seen[it->second])
                    parse_fail(feature_file, fr.line_no(), "duplicate feature row");
                seen[it->second] = true;
                ++rows;
                for (int j = 0; j < feat_dim; ++j)
                    feats[static_cast<std::size_t>(it->second) * feat_dim + j] =
                        parse_float(fr, fields[j + 1]);
            }
            if (rows != num_nodes)
                throw ValidationError(feature_file + ": " + std::to_string(rows) +
                                      " feature rows for " + std::to_string(num_nodes) +
                                      " nodes");
        }
    }

    // --- labels ---
    std::vector<std::int32_t> labels(num_nodes, -1);
    {
        CsvReader lr(label_file);
        while (lr.next(fields)) {
            if (fields.size() != 2)
                parse_fail(label_file, lr.line_no(), "expected node_id,class_id");
            auto it = id_index.find(fields[0]);
            if (it == id_index.end())
                throw ValidationError(label_file + ":" + std::to_string(lr.line_no()) +
                                      ": unknown node id '" + fields[0] + "'");
            long cls = parse_int(lr, fields[1]);
            if (cls < 0)
                parse_fail(label_file, lr.line_no(), "negative class id");
            labels[it->second] = static_cast<std::int32_t>(cls);
        }
    }

    GraphBuilder b(type_names, relation_names);
    for (std::int64_t u = 0; u < num_nodes; ++u) {
        std::vector<float> row(feats.begin() + u * feat_dim,
                               feats.begin() + (u + 1) * feat_dim);
        b.add_node(ids[u], type_index.at(node_type_name[u]), std::move(row));
    }
    for (std::int64_t u = 0; u < num_nodes; ++u)
        if (labels[u] >= 0) b.set_label(static_cast<std::int32_t>(u), labels[u]);
    for (const auto& e : raw_edges) b.add_edge(e.u, e.v, e.rel);
    HinGraph g = b.build(opts.allow_self_loops);

    // declared histogram must match what was loaded
    if (!declared_types.empty()) {
        auto hist = g.type_histogram();
        for (const auto& [name, count] : declared_types) {
            int t = type_index.at(name);
            if (hist[t] != count)
                throw ValidationError(node_file + ": declared " + std::to_string(count) +
                                      " nodes of type '" + name + "', found " +
                                      std::to_string(hist[t]));
        }
    }

    if (log) {
        auto hist = g.type_histogram();
        *log << "loaded graph: " << g.num_nodes << " nodes, "
             << g.num_undirected_edges() << " undirected edges, " << g.num_types
             << " node types, " << g.num_relations << " relation types\n";
        for (int t = 0; t < g.num_types; ++t)
            *log << "  type " << g.type_names[t] << ": " << hist[t] << " nodes\n";
        *log << "  labeled nodes: " << g.labeled_nodes().size() << " ("
             << g.num_classes << " classes)\n";
        if (b.duplicate_edges_collapsed() > 0)
            *log << "  collapsed " << b.duplicate_edges_collapsed()
                 << " duplicate undirected edges\n";
    }
    return g;
}

HinGraph load_graph_dir(const std::string& dir, const LoadOptions& opts,
                        std::ostream* log) {
    fs::path p(dir);
    std::string feat = fs::exists(p / "features.bin") ? (p / "features.bin").string()
                                                      : (p / "features.csv").string();
    return load_graph((p / "nodes.csv").string(), (p / "edges.csv").string(), feat,
                      (p / "labels.csv").string(), opts, log);
}

void save_graph(const HinGraph& g, const std::string& dir, bool binary_features) {
    fs::create_directories(dir);
    fs::path p(dir);
    {
        std::ofstream out(p / "nodes.csv");
        if (!out) throw IoError("cannot write " + (p / "nodes.csv").string());
        out << "node_id,type_name\n";
        auto hist = g.type_histogram();
        out << "# types:";
        for (int t = 0; t < g.num_types; ++t)
            out << (t ? "," : " ") << g.type_names[t] << "=" << hist[t];
        out << "\n";
        for (std::int64_t u = 0; u < g.num_nodes; ++u)
            out << g.node_ids[u] << "," << g.type_names[g.node_type[u]] << "\n";
    }
    {
        std::ofstream out(p / "edges.csv");
        out << "src,dst,relation_name\n";
        out << "# relations:";
        for (int r = 0; r < g.num_relations; ++r)
            out << (r ? "," : " ") << g.relation_names[r] << "=0";
        out << "\n";
        for (std::int64_t u = 0; u < g.num_nodes; ++u)
            for (std::int64_t i = g.adj_offsets[u]; i < g.adj_offsets[u + 1]; ++i) {
                std::int32_t v = g.adj_nodes[i];
                if (v < u) continue;  // emit each undirected edge once
                out << g.node_ids[u] << "," << g.node_ids[v] << ","
                    << g.relation_names[g.adj_rel[i]] << "\n";
            }
    }
    if (binary_features) {
        std::ofstream out(p / "features.bin", std::ios::binary);
        out.write(kFeatureMagic, 4);
        std::uint32_t nv = static_cast<std::uint32_t>(g.num_nodes);
        std::uint32_t dim = static_cast<std::uint32_t>(g.feat_dim);
        out.write(reinterpret_cast<const char*>(&nv), 4);
        out.write(reinterpret_cast<const char*>(&dim), 4);
        out.write(reinterpret_cast<const char*>(g.features.data()),
                  static_cast<std::streamsize>(g.features.size() * sizeof(float)));
        if (!out) throw IoError("failed writing features.bin");
    } else {
        std::ofstream out(p / "features.csv");
        out << "node_id";
        for (int j = 0; j < g.feat_dim; ++j) out << ",f" << j;
        out << "\n";
        out.precision(9);
        for (std::int64_t u = 0; u < g.num_nodes; ++u) {
            out << g.node_ids[u];
            for (int j = 0; j < g.feat_dim; ++j) out << "," << g.feature_row(u)[j];
            out << "\n";
        }
    }
    {
        std::ofstream out(p / "labels.csv");
        out << "node_id,class_id\n";
        for (std::int64_t u = 0; u < g.num_nodes; ++u)
            if (g.labels[u] >= 0) out << g.node_ids[u] << "," << g.labels[u] << "\n";
    }
}

}  // namespace ringformer

#pragma once

// Binary artifact formats.
//
// Checkpoint ("RFC1"): u32 tensor count, then per tensor
//   u32 name length, name bytes, u32 rank, u32 dims[rank], f32 data.
// Embeddings ("RFE1"): u64 count, u32 dim, u64 node ids[count],
//   f32 data row-major.

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ringformer/model.hpp"

namespace ringformer {

namespace detail {

inline void write_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}
inline void write_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
}
inline std::uint32_t read_u32(std::ifstream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
inline std::uint64_t read_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

}  // namespace detail

template <typename Real>
void save_checkpoint(ModelParams<Real>& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write("RFC1", 4);
    std::uint32_t count = 0;
    params.for_each([&](const std::string&, Tensor<Real>&) { ++count; });
    detail::write_u32(out, count);
    params.for_each([&](const std::string& name, Tensor<Real>& t) {
        detail::write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::write_u32(out, 2);
        detail::write_u32(out, static_cast<std::uint32_t>(t.rows()));
        detail::write_u32(out, static_cast<std::uint32_t>(t.cols()));
        std::vector<float> buf(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) buf[i] = static_cast<float>(t.data()[i]);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
    });
    if (!out) throw IoError("failed writing " + path);
}

// Loads into an already-shaped parameter set; every tensor must be present
// with matching shape.
template <typename Real>
void load_checkpoint(ModelParams<Real>& params, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "RFC1", 4) != 0)
        throw ParseError(path + ": bad magic, not a checkpoint");
    std::uint32_t count = detail::read_u32(in);
    std::unordered_map<std::string, std::pair<std::vector<float>, std::pair<int, int>>> loaded;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t nlen = detail::read_u32(in);
        std::string name(nlen, '\0');
        in.read(name.data(), nlen);
        std::uint32_t rank = detail::read_u32(in);
        if (rank != 2) throw ParseError(path + ": unsupported tensor rank");
        int rows = static_cast<int>(detail::read_u32(in));
        int cols = static_cast<int>(detail::read_u32(in));
        std::vector<float> buf(static_cast<std::size_t>(rows) * cols);
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
        if (!in) throw ParseError(path + ": truncated tensor '" + name + "'");
        loaded.emplace(std::move(name), std::make_pair(std::move(buf), std::make_pair(rows, cols)));
    }
    params.for_each([&](const std::string& name, Tensor<Real>& t) {
        auto it = loaded.find(name);
        if (it == loaded.end())
            throw ValidationError(path + ": checkpoint is missing tensor '" + name + "'");
        const auto& [buf, shape] = it->second;
        if (shape.first != t.rows() || shape.second != t.cols())
            throw ValidationError(path + ": shape mismatch for tensor '" + name + "'");
        for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<Real>(buf[i]);
    });
}

struct EmbeddingMatrix {
    std::vector<std::int64_t> node_ids;
    int dim = 0;
    std::vector<float> data;  // count x dim

    const float* row(std::size_t i) const { return data.data() + i * dim; }
    std::size_t count() const { return node_ids.size(); }
};

inline void write_embeddings(const EmbeddingMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write("RFE1", 4);
    detail::write_u64(out, m.node_ids.size());
    detail::write_u32(out, static_cast<std::uint32_t>(m.dim));
    for (auto id : m.node_ids) detail::write_u64(out, static_cast<std::uint64_t>(id));
    out.write(reinterpret_cast<const char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    if (!out) throw IoError("failed writing " + path);
}

inline EmbeddingMatrix read_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "RFE1", 4) != 0)
        throw ParseError(path + ": bad magic, not an embedding matrix");
    EmbeddingMatrix m;
    std::uint64_t count = detail::read_u64(in);
    m.dim = static_cast<int>(detail::read_u32(in));
    m.node_ids.resize(count);
    for (auto& id : m.node_ids) id = static_cast<std::int64_t>(detail::read_u64(in));
    m.data.resize(count * static_cast<std::size_t>(m.dim));
    in.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    if (!in) throw ParseError(path + ": truncated embedding matrix");
    return m;
}

inline void write_embeddings_csv(const EmbeddingMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "node_id";
    for (int j = 0; j < m.dim; ++j) out << ",e" << j;
    out << "\n";
    out.precision(9);
    for (std::size_t i = 0; i < m.count(); ++i) {
        out << m.node_ids[i];
        for (int j = 0; j < m.dim; ++j) out << "," << m.row(i)[j];
        out << "\n";
    }
}

}  // namespace ringformer

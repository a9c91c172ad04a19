#pragma once

// The TRGT hierarchy: a Type-level Transformer with an attention readout keyed
// on the 0-ring representation (per ring), then a Ring-level Transformer with
// an attention readout combining ring representations into one embedding.
//
// Readouts:
//   type level:  alpha_t = softmax_t(h0 . h_{k,t}),          h_k = sum_t alpha_t h_{k,t}
//   ring level:  alpha_k = softmax_{k=1..K}((z0 || z_k) W^T), z = z0 + sum_k alpha_k z_k
// The type-level dot product is unscaled; the ring-level softmax runs over
// k = 1..K only and z0 enters the sum with implicit weight 1.

#include <string>

#include "ringformer/ring2token.hpp"
#include "ringformer/transformer.hpp"

namespace ringformer {

enum class Variant { full, no_ring, no_type, no_att };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_ring: return "no_ring";
        case Variant::no_type: return "no_type";
        case Variant::no_att: return "no_att";
    }
    return "full";
}

inline Variant parse_variant(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "no_ring") return Variant::no_ring;
    if (s == "no_type") return Variant::no_type;
    if (s == "no_att") return Variant::no_att;
    throw ValidationError("unknown variant '" + s + "'");
}

struct ModelConfig {
    int K = 2;
    int T = 2;
    int d = 128;
    int heads = 8;
    int L_t = 1;
    int L_r = 1;
    double dropout = 0.01;
    double attn_dropout = 0.05;
    int d_ff_mult = 2;
    Variant variant = Variant::full;
    bool mask_empty = false;
    bool per_ring_type_encoder = false;
    std::uint64_t seed = 42;
    double ln_eps = 1e-5;

    void check() const {
        if (K < 1) throw ValidationError("ModelConfig: K must be >= 1");
        if (d <= 0 || heads <= 0 || d % heads != 0)
            throw ValidationError("ModelConfig: d must be a positive multiple of heads");
        if (L_t < 1 || L_r < 1) throw ValidationError("ModelConfig: layer counts must be >= 1");
        if (d_ff_mult < 1) throw ValidationError("ModelConfig: d_ff multiplier must be >= 1");
        if (dropout < 0 || dropout >= 1 || attn_dropout < 0 || attn_dropout >= 1)
            throw ValidationError("ModelConfig: dropout rates must be in [0, 1)");
    }
};

// All learnable weights. Shapes depend only on (d_in, d, d_ff, num_classes),
// never on K or T, so one parameter set serves every variant.
template <typename Real>
struct ModelParams {
    int d_in = 0;
    int d = 0;
    int num_classes = 0;

    Tensor<Real> p_in_w, p_in_b;                        // d_in x d, 1 x d
    Tensor<Real> mlp0_w1, mlp0_b1, mlp0_w2, mlp0_b2;    // 0-ring MLP, two affine d->d
    std::vector<std::vector<EncoderLayerParams<Real>>> type_enc;  // [stacks][L_t]
    std::vector<EncoderLayerParams<Real>> ring_enc;               // [L_r]
    Tensor<Real> ring_readout_w;                        // 1 x 2d
    Tensor<Real> cls_w, cls_b;                          // d x classes, 1 x classes

    static ModelParams init(const ModelConfig& cfg, int d_in, int num_classes) {
        cfg.check();
        if (d_in < 1 || num_classes < 1)
            throw ValidationError("ModelParams: d_in and num_classes must be positive");
        ModelParams p;
        p.d_in = d_in;
        p.d = cfg.d;
        p.num_classes = num_classes;
        std::mt19937_64 rng(cfg.seed);
        const int d = cfg.d;
        const int d_ff = cfg.d * cfg.d_ff_mult;
        p.p_in_w = uniform_init<Real>(d_in, d, d_in, rng);
        p.p_in_b = Tensor<Real>::zeros(1, d);
        p.mlp0_w1 = uniform_init<Real>(d, d, d, rng);
        p.mlp0_b1 = Tensor<Real>::zeros(1, d);
        p.mlp0_w2 = uniform_init<Real>(d, d, d, rng);
        p.mlp0_b2 = Tensor<Real>::zeros(1, d);
        const int stacks = cfg.per_ring_type_encoder ? cfg.K : 1;
        p.type_enc.resize(stacks);
        for (int s = 0; s < stacks; ++s)
            for (int l = 0; l < cfg.L_t; ++l)
                p.type_enc[s].push_back(init_encoder_layer<Real>(d, d_ff, rng));
        for (int l = 0; l < cfg.L_r; ++l)
            p.ring_enc.push_back(init_encoder_layer<Real>(d, d_ff, rng));
        p.ring_readout_w = uniform_init<Real>(1, 2 * d, 2 * d, rng);
        p.cls_w = uniform_init<Real>(d, num_classes, d, rng);
        p.cls_b = Tensor<Real>::zeros(1, num_classes);
        return p;
    }

    template <typename Fn>
    void for_each(Fn&& fn) {
        fn(std::string("p_in.w"), p_in_w);
        fn(std::string("p_in.b"), p_in_b);
        fn(std::string("mlp0.w1"), mlp0_w1);
        fn(std::string("mlp0.b1"), mlp0_b1);
        fn(std::string("mlp0.w2"), mlp0_w2);
        fn(std::string("mlp0.b2"), mlp0_b2);
        for (std::size_t s = 0; s < type_enc.size(); ++s)
            for (std::size_t l = 0; l < type_enc[s].size(); ++l) {
                std::string prefix = type_enc.size() > 1
                                         ? "type_enc.r" + std::to_string(s) + ".l" + std::to_string(l)
                                         : "type_enc.l" + std::to_string(l);
                type_enc[s][l].for_each(prefix, fn);
            }
        for (std::size_t l = 0; l < ring_enc.size(); ++l)
            ring_enc[l].for_each("ring_enc.l" + std::to_string(l), fn);
        fn(std::string("ring_readout.w"), ring_readout_w);
        fn(std::string("cls.w"), cls_w);
        fn(std::string("cls.b"), cls_b);
    }

    void set_requires_grad(bool b) {
        for_each([b](const std::string&, Tensor<Real>& t) { t.set_requires_grad(b); });
    }

    void zero_grad() {
        for_each([](const std::string&, Tensor<Real>& t) {
            if (t.requires_grad()) t.zero_grad();
        });
    }

    ModelParams clone() const {
        ModelParams c;
        c.d_in = d_in;
        c.d = d;
        c.num_classes = num_classes;
        auto copy = [](const Tensor<Real>& t) {
            return Tensor<Real>::from(t.values(), t.rows(), t.cols());
        };
        c.p_in_w = copy(p_in_w);
        c.p_in_b = copy(p_in_b);
        c.mlp0_w1 = copy(mlp0_w1);
        c.mlp0_b1 = copy(mlp0_b1);
        c.mlp0_w2 = copy(mlp0_w2);
        c.mlp0_b2 = copy(mlp0_b2);
        c.type_enc.resize(type_enc.size());
        auto copy_layer = [&](const EncoderLayerParams<Real>& l) {
            EncoderLayerParams<Real> o;
            o.wq = copy(l.wq); o.wk = copy(l.wk); o.wv = copy(l.wv); o.wo = copy(l.wo);
            o.ff_w1 = copy(l.ff_w1); o.ff_b1 = copy(l.ff_b1);
            o.ff_w2 = copy(l.ff_w2); o.ff_b2 = copy(l.ff_b2);
            o.ln1_g = copy(l.ln1_g); o.ln1_b = copy(l.ln1_b);
            o.ln2_g = copy(l.ln2_g); o.ln2_b = copy(l.ln2_b);
            return o;
        };
        for (std::size_t s = 0; s < type_enc.size(); ++s)
            for (const auto& l : type_enc[s]) c.type_enc[s].push_back(copy_layer(l));
        for (const auto& l : ring_enc) c.ring_enc.push_back(copy_layer(l));
        c.ring_readout_w = copy(ring_readout_w);
        c.cls_w = copy(cls_w);
        c.cls_b = copy(cls_b);
        return c;
    }
};

template <typename Real>
struct ForwardOutput {
    Tensor<Real> embedding;  // 1 x d
    Tensor<Real> logits;     // 1 x num_classes
    // attention weights, copied out for inspection (empty in the no_att variant)
    std::vector<std::vector<Real>> type_alphas;  // one vector of length T per ring k >= 1
    std::vector<Real> ring_alphas;               // length K (k = 1..K)
    // type-level readouts h_0..h_K and their ring-encoded counterparts
    // z_0..z_K, copied out for inspection
    std::vector<std::vector<Real>> ring_readouts;
    std::vector<std::vector<Real>> encoded_rings;
};

namespace detail {

template <typename Real>
Tensor<Real> token_block(const TokenTensor& tok, int k) {
    std::vector<Real> data(static_cast<std::size_t>(tok.T) * tok.d_in);
    for (int t = 0; t < tok.T; ++t) {
        const float* src = tok.token(k, t);
        for (int j = 0; j < tok.d_in; ++j)
            data[static_cast<std::size_t>(t) * tok.d_in + j] = static_cast<Real>(src[j]);
    }
    return Tensor<Real>::from(std::move(data), tok.T, tok.d_in);
}

template <typename Real>
void check_finite(const Tensor<Real>& t, const char* what) {
    for (std::size_t i = 0; i < t.size(); ++i)
        if (!std::isfinite(t.data()[i]))
            throw NumericalError(std::string("non-finite value in ") + what);
}

}  // namespace detail

// Runs the hierarchy on one node's token block. The block may have any
// (rings, types) shape: the w/o-Ring and w/o-Type variants feed re-pooled
// blocks through the identical parameter set. With variant = no_att both
// attention readouts are replaced by unweighted averages.
template <typename Real>
ForwardOutput<Real> hhgt_forward(Tape<Real>* tape, const TokenTensor& tok,
                                 ModelParams<Real>& params, const ModelConfig& cfg,
                                 bool train, std::mt19937_64& rng) {
    if (tok.d_in != params.d_in)
        throw ValidationError("hhgt_forward: token d_in does not match model");
    const int K_eff = tok.K;
    const int T_eff = tok.T;
    if (K_eff < 1) throw ValidationError("hhgt_forward: need at least one ring");

    EncoderRunConfig<Real> enc;
    enc.heads = cfg.heads;
    enc.dropout = cfg.dropout;
    enc.attn_dropout = cfg.attn_dropout;
    enc.ln_eps = static_cast<Real>(cfg.ln_eps);
    enc.train = train;

    ForwardOutput<Real> out;

    // 0-ring: the single occupied row, projected then passed through the MLP.
    int t0 = -1;
    for (int t = 0; t < T_eff; ++t)
        if (tok.occupied(0, t)) {
            if (t0 != -1) throw ValidationError("hhgt_forward: ring 0 has multiple occupied buckets");
            t0 = t;
        }
    if (t0 == -1) throw ValidationError("hhgt_forward: ring 0 is empty");
    auto ring0 = detail::token_block<Real>(tok, 0);
    auto x0 = gather_rows(tape, ring0, {t0});
    auto h0_in = add_row_bias(tape, matmul(tape, x0, params.p_in_w), params.p_in_b);
    auto h0_mid = gelu(tape, add_row_bias(tape, matmul(tape, h0_in, params.mlp0_w1), params.mlp0_b1));
    auto h0 = add_row_bias(tape, matmul(tape, h0_mid, params.mlp0_w2), params.mlp0_b2);

    // per-ring type level
    std::vector<Tensor<Real>> ring_reprs;
    ring_reprs.push_back(h0);
    auto h0_t = transpose(tape, h0);  // d x 1, shared across rings
    for (int k = 1; k <= K_eff; ++k) {
        bool any_occupied = false;
        for (int t = 0; t < T_eff; ++t) any_occupied = any_occupied || tok.occupied(k, t);
        if (cfg.mask_empty && !any_occupied) {
            ring_reprs.push_back(Tensor<Real>::zeros(1, params.d));
            if (cfg.variant != Variant::no_att)
                out.type_alphas.emplace_back(T_eff, Real(0));
            continue;
        }

        Tensor<Real> key_mask;
        const Tensor<Real>* mask_ptr = nullptr;
        if (cfg.mask_empty) {
            key_mask = Tensor<Real>::zeros(1, T_eff);
            for (int t = 0; t < T_eff; ++t)
                if (!tok.occupied(k, t)) key_mask.at(0, t) = Real(-1e30);
            mask_ptr = &key_mask;
        }

        auto block = detail::token_block<Real>(tok, k);
        auto projected = add_row_bias(tape, matmul(tape, block, params.p_in_w), params.p_in_b);
        auto& stack = params.type_enc[params.type_enc.size() > 1
                                          ? std::min<std::size_t>(k - 1, params.type_enc.size() - 1)
                                          : 0];
        auto encoded = encode(tape, projected, stack, enc, rng, mask_ptr);  // T x d

        if (cfg.variant == Variant::no_att) {
            ring_reprs.push_back(mean_rows(tape, encoded));
        } else {
            auto logits = transpose(tape, matmul(tape, encoded, h0_t));  // 1 x T
            auto alpha = softmax_rows(tape, logits, mask_ptr);
            out.type_alphas.emplace_back(alpha.values());
            ring_reprs.push_back(matmul(tape, alpha, encoded));  // 1 x d
        }
    }

    // ring level
    auto seq = concat_rows(tape, ring_reprs);               // (K_eff+1) x d
    for (const auto& r : ring_reprs)
        out.ring_readouts.emplace_back(r.values());
    auto z_all = encode(tape, seq, params.ring_enc, enc, rng);
    for (int k = 0; k <= K_eff; ++k)
        out.encoded_rings.emplace_back(z_all.data() + static_cast<std::size_t>(k) * params.d,
                                       z_all.data() + static_cast<std::size_t>(k + 1) * params.d);
    auto z0 = gather_rows(tape, z_all, {0});
    std::vector<int> rest(K_eff);
    for (int k = 0; k < K_eff; ++k) rest[k] = k + 1;
    auto zr = gather_rows(tape, z_all, rest);               // K_eff x d

    Tensor<Real> z;
    if (cfg.variant == Variant::no_att) {
        z = add(tape, z0, mean_rows(tape, zr));
    } else {
        auto cat = concat_cols(tape, repeat_rows(tape, z0, K_eff), zr);  // K x 2d
        auto logits = transpose(tape, matmul(tape, cat, transpose(tape, params.ring_readout_w)));
        auto alpha = softmax_rows(tape, logits);            // 1 x K
        out.ring_alphas = alpha.values();
        z = add(tape, z0, matmul(tape, alpha, zr));
    }

    out.embedding = z;
    out.logits = add_row_bias(tape, matmul(tape, z, params.cls_w), params.cls_b);
    detail::check_finite(out.embedding, "embedding");
    detail::check_finite(out.logits, "logits");
    return out;
}

// Token supplier that applies the variant's re-pooling. For full / no_att the
// cached tensors are used as-is; no_ring and no_type re-pool from the graph
// (the cache wire format carries means only, not member counts).
class VariantTokenSource {
public:
    VariantTokenSource(const HinGraph& g, const TokenCache& cache, Variant variant)
        : g_(g), cache_(cache), variant_(variant) {}

    TokenTensor get(std::int32_t node) const {
        switch (variant_) {
            case Variant::full:
            case Variant::no_att:
                return cache_.at(node);
            case Variant::no_ring:
                return repool_hop_union(g_, bfs_rings(g_, node, static_cast<int>(cache_.header.K)));
            case Variant::no_type:
                return repool_type_mixed(g_, bfs_rings(g_, node, static_cast<int>(cache_.header.K)));
        }
        throw ValidationError("unknown variant");
    }

    std::vector<std::int32_t> available_nodes() const {
        std::vector<std::int32_t> out;
        out.reserve(cache_.entries.size());
        for (const auto& e : cache_.entries)
            out.push_back(static_cast<std::int32_t>(e.target));
        return out;
    }

private:
    const HinGraph& g_;
    const TokenCache& cache_;
    Variant variant_;
};

}  // namespace ringformer

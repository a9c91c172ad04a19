#pragma once

// Pre-LN multi-head self-attention encoder:
//   H~ = MSA(LN(H)) + H
//   H' = FFN(LN(H~)) + H~
// with FFN(x) = gelu(x W1 + b1) W2 + b2. No positional encodings anywhere;
// the stack is permutation-equivariant over input rows.

#include <random>

#include "ringformer/tensor.hpp"

namespace ringformer {

template <typename Real>
struct EncoderLayerParams {
    Tensor<Real> wq, wk, wv, wo;              // d x d, fused heads
    Tensor<Real> ff_w1, ff_b1, ff_w2, ff_b2;  // d x d_ff, 1 x d_ff, d_ff x d, 1 x d
    Tensor<Real> ln1_g, ln1_b, ln2_g, ln2_b;  // 1 x d each

    template <typename Fn>
    void for_each(const std::string& prefix, Fn&& fn) {
        fn(prefix + ".wq", wq);
        fn(prefix + ".wk", wk);
        fn(prefix + ".wv", wv);
        fn(prefix + ".wo", wo);
        fn(prefix + ".ff_w1", ff_w1);
        fn(prefix + ".ff_b1", ff_b1);
        fn(prefix + ".ff_w2", ff_w2);
        fn(prefix + ".ff_b2", ff_b2);
        fn(prefix + ".ln1_g", ln1_g);
        fn(prefix + ".ln1_b", ln1_b);
        fn(prefix + ".ln2_g", ln2_g);
        fn(prefix + ".ln2_b", ln2_b);
    }
};

template <typename Real>
Tensor<Real> uniform_init(int rows, int cols, int fan_in, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    auto t = Tensor<Real>::zeros(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<Real>(u(rng));
    return t;
}

template <typename Real>
Tensor<Real> const_row(int cols, Real v) {
    auto t = Tensor<Real>::zeros(1, cols);
    for (int c = 0; c < cols; ++c) t.data()[c] = v;
    return t;
}

template <typename Real>
EncoderLayerParams<Real> init_encoder_layer(int d, int d_ff, std::mt19937_64& rng) {
    EncoderLayerParams<Real> p;
    p.wq = uniform_init<Real>(d, d, d, rng);
    p.wk = uniform_init<Real>(d, d, d, rng);
    p.wv = uniform_init<Real>(d, d, d, rng);
    p.wo = uniform_init<Real>(d, d, d, rng);
    p.ff_w1 = uniform_init<Real>(d, d_ff, d, rng);
    p.ff_b1 = Tensor<Real>::zeros(1, d_ff);
    p.ff_w2 = uniform_init<Real>(d_ff, d, d_ff, rng);
    p.ff_b2 = Tensor<Real>::zeros(1, d);
    p.ln1_g = const_row<Real>(d, Real(1));
    p.ln1_b = Tensor<Real>::zeros(1, d);
    p.ln2_g = const_row<Real>(d, Real(1));
    p.ln2_b = Tensor<Real>::zeros(1, d);
    return p;
}

template <typename Real>
struct EncoderRunConfig {
    int heads = 8;
    double dropout = 0.0;       // on MSA/FFN outputs before the residual add
    double attn_dropout = 0.0;  // on attention weights
    Real ln_eps = Real(1e-5);
    bool train = false;
};

// Scaled dot-product attention per head over the fused projections.
// `key_mask`, when given, is a 1 x n row of additive logits (0 to keep,
// a large negative value to drop the key position).
template <typename Real>
Tensor<Real> msa(Tape<Real>* tape, Tensor<Real> h, EncoderLayerParams<Real>& p,
                 const EncoderRunConfig<Real>& cfg, std::mt19937_64& rng,
                 const Tensor<Real>* key_mask = nullptr) {
    const int d = h.cols();
    if (d % cfg.heads != 0)
        throw ValidationError("msa: hidden dim not divisible by head count");
    const int dk = d / cfg.heads;
    const Real inv_scale = Real(1) / static_cast<Real>(std::sqrt(static_cast<double>(dk)));

    auto q = matmul(tape, h, p.wq);
    auto k = matmul(tape, h, p.wk);
    auto v = matmul(tape, h, p.wv);

    std::vector<Tensor<Real>> head_out;
    head_out.reserve(cfg.heads);
    Tensor<Real> merged;
    for (int hd = 0; hd < cfg.heads; ++hd) {
        auto qh = slice_cols(tape, q, hd * dk, (hd + 1) * dk);
        auto kh = slice_cols(tape, k, hd * dk, (hd + 1) * dk);
        auto vh = slice_cols(tape, v, hd * dk, (hd + 1) * dk);
        auto logits = scale(tape, matmul(tape, qh, transpose(tape, kh)), inv_scale);
        auto attn = softmax_rows(tape, logits, key_mask);
        attn = dropout(tape, attn, cfg.attn_dropout, cfg.train, rng);
        auto oh = matmul(tape, attn, vh);
        merged = hd == 0 ? oh : concat_cols(tape, merged, oh);
    }
    return matmul(tape, merged, p.wo);
}

template <typename Real>
Tensor<Real> encoder_layer(Tape<Real>* tape, Tensor<Real> h, EncoderLayerParams<Real>& p,
                           const EncoderRunConfig<Real>& cfg, std::mt19937_64& rng,
                           const Tensor<Real>* key_mask = nullptr) {
    auto a = layer_norm(tape, h, p.ln1_g, p.ln1_b, cfg.ln_eps);
    auto m = msa(tape, a, p, cfg, rng, key_mask);
    m = dropout(tape, m, cfg.dropout, cfg.train, rng);
    auto h1 = add(tape, h, m);

    auto b = layer_norm(tape, h1, p.ln2_g, p.ln2_b, cfg.ln_eps);
    auto f = add_row_bias(tape, matmul(tape, b, p.ff_w1), p.ff_b1);
    f = gelu(tape, f);
    f = add_row_bias(tape, matmul(tape, f, p.ff_w2), p.ff_b2);
    f = dropout(tape, f, cfg.dropout, cfg.train, rng);
    return add(tape, h1, f);
}

template <typename Real>
Tensor<Real> encode(Tape<Real>* tape, Tensor<Real> h,
                    std::vector<EncoderLayerParams<Real>>& layers,
                    const EncoderRunConfig<Real>& cfg, std::mt19937_64& rng,
                    const Tensor<Real>* key_mask = nullptr) {
    if (layers.empty()) throw ValidationError("encode: at least one layer required");
    for (auto& layer : layers) h = encoder_layer(tape, h, layer, cfg, rng, key_mask);
    return h;
}

}  // namespace ringformer

#pragma once

// Straight-line reference computation of the full hierarchy, written against
// raw double matrices with explicit loops. Deliberately shares no code with
// the tensor engine or the model: it consumes only the exported named weight
// matrices and a raw token block, and is used to pin down the forward math.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ringformer/model.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat mat_mul(const Mat& a, const Mat& b) {
    const std::size_t n = a.size(), m = b.size(), p = b[0].size();
    Mat c(n, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t j = 0; j < p; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline Mat add_bias(Mat a, const std::vector<double>& bias) {
    for (auto& row : a)
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += bias[j];
    return a;
}

inline std::vector<double> softmax_vec(const std::vector<double>& x) {
    double mx = x[0];
    for (double v : x) mx = std::max(mx, v);
    std::vector<double> e(x.size());
    double sum = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        e[i] = std::exp(x[i] - mx);
        sum += e[i];
    }
    for (auto& v : e) v /= sum;
    return e;
}

inline double gelu_scalar(double v) {
    return 0.5 * v * (1.0 + std::erf(v * 0.7071067811865475244));
}

inline Mat layer_norm_mat(const Mat& x, const std::vector<double>& gain,
                          const std::vector<double>& bias, double eps) {
    Mat y = x;
    const std::size_t d = x[0].size();
    for (std::size_t r = 0; r < x.size(); ++r) {
        double mean = 0;
        for (double v : x[r]) mean += v;
        mean /= static_cast<double>(d);
        double var = 0;
        for (double v : x[r]) var += (v - mean) * (v - mean);
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < d; ++j)
            y[r][j] = gain[j] * (x[r][j] - mean) * inv + bias[j];
    }
    return y;
}

struct Params {
    std::map<std::string, Mat> tensors;

    const Mat& mat(const std::string& name) const {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw std::runtime_error("oracle: missing tensor " + name);
        return it->second;
    }
    std::vector<double> row(const std::string& name) const { return mat(name)[0]; }
};

// Copies every named weight out of the model (shared type-encoder layout).
inline Params export_params(ringformer::ModelParams<double>& p) {
    Params out;
    p.for_each([&](const std::string& name, ringformer::Tensor<double>& t) {
        Mat m(t.rows(), std::vector<double>(t.cols()));
        for (int r = 0; r < t.rows(); ++r)
            for (int c = 0; c < t.cols(); ++c) m[r][c] = t.at(r, c);
        out.tensors.emplace(name, std::move(m));
    });
    return out;
}

inline Mat self_attention(const Mat& h, const Params& p, const std::string& prefix,
                          int heads) {
    const std::size_t n = h.size(), d = h[0].size();
    const std::size_t dk = d / heads;
    Mat q = mat_mul(h, p.mat(prefix + ".wq"));
    Mat k = mat_mul(h, p.mat(prefix + ".wk"));
    Mat v = mat_mul(h, p.mat(prefix + ".wv"));
    Mat merged(n, std::vector<double>(d, 0.0));
    for (int hd = 0; hd < heads; ++hd) {
        const std::size_t off = hd * dk;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> logits(n, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                double dot = 0;
                for (std::size_t c = 0; c < dk; ++c) dot += q[i][off + c] * k[j][off + c];
                logits[j] = dot / std::sqrt(static_cast<double>(dk));
            }
            auto attn = softmax_vec(logits);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t c = 0; c < dk; ++c)
                    merged[i][off + c] += attn[j] * v[j][off + c];
        }
    }
    return mat_mul(merged, p.mat(prefix + ".wo"));
}

inline Mat encoder_stack(Mat h, const Params& p, const std::string& stack_prefix,
                         int layers, int heads, double ln_eps) {
    for (int l = 0; l < layers; ++l) {
        const std::string pre = stack_prefix + ".l" + std::to_string(l);
        Mat normed = layer_norm_mat(h, p.row(pre + ".ln1_g"), p.row(pre + ".ln1_b"), ln_eps);
        Mat attn = self_attention(normed, p, pre, heads);
        for (std::size_t r = 0; r < h.size(); ++r)
            for (std::size_t c = 0; c < h[0].size(); ++c) h[r][c] += attn[r][c];
        Mat normed2 = layer_norm_mat(h, p.row(pre + ".ln2_g"), p.row(pre + ".ln2_b"), ln_eps);
        Mat ff = add_bias(mat_mul(normed2, p.mat(pre + ".ff_w1")), p.row(pre + ".ff_b1"));
        for (auto& row : ff)
            for (auto& v : row) v = gelu_scalar(v);
        ff = add_bias(mat_mul(ff, p.mat(pre + ".ff_w2")), p.row(pre + ".ff_b2"));
        for (std::size_t r = 0; r < h.size(); ++r)
            for (std::size_t c = 0; c < h[0].size(); ++c) h[r][c] += ff[r][c];
    }
    return h;
}

struct Output {
    std::vector<double> z;
    std::vector<double> logits;
    std::vector<std::vector<double>> type_alphas;
    std::vector<double> ring_alphas;
};

inline Output run_hhgt(const Params& p, const ringformer::TokenTensor& tok, int heads,
                       int L_t, int L_r, double ln_eps, bool average_readout) {
    const int K = tok.K, T = tok.T, d_in = tok.d_in;
    const Mat& w_in = p.mat("p_in.w");
    const auto b_in = p.row("p_in.b");
    const int d = static_cast<int>(w_in[0].size());

    auto project_ring = [&](int k) {
        Mat x(T, std::vector<double>(d_in));
        for (int t = 0; t < T; ++t)
            for (int j = 0; j < d_in; ++j) x[t][j] = tok.token(k, t)[j];
        return add_bias(mat_mul(x, w_in), b_in);
    };

    // 0-ring MLP on the single occupied row
    int t0 = -1;
    for (int t = 0; t < T; ++t)
        if (tok.occupied(0, t)) t0 = t;
    Mat ring0 = project_ring(0);
    Mat x0{ring0[t0]};
    Mat mid = add_bias(mat_mul(x0, p.mat("mlp0.w1")), p.row("mlp0.b1"));
    for (auto& v : mid[0]) v = gelu_scalar(v);
    Mat h0 = add_bias(mat_mul(mid, p.mat("mlp0.w2")), p.row("mlp0.b2"));

    Output out;
    Mat ring_seq{h0[0]};
    for (int k = 1; k <= K; ++k) {
        Mat encoded = encoder_stack(project_ring(k), p, "type_enc", L_t, heads, ln_eps);
        std::vector<double> hk(d, 0.0);
        if (average_readout) {
            for (int t = 0; t < T; ++t)
                for (int j = 0; j < d; ++j) hk[j] += encoded[t][j] / T;
        } else {
            std::vector<double> logits(T, 0.0);
            for (int t = 0; t < T; ++t)
                for (int j = 0; j < d; ++j) logits[t] += h0[0][j] * encoded[t][j];
            auto alpha = softmax_vec(logits);
            out.type_alphas.push_back(alpha);
            for (int t = 0; t < T; ++t)
                for (int j = 0; j < d; ++j) hk[j] += alpha[t] * encoded[t][j];
        }
        ring_seq.push_back(hk);
    }

    Mat z_all = encoder_stack(ring_seq, p, "ring_enc", L_r, heads, ln_eps);
    std::vector<double> z = z_all[0];
    if (average_readout) {
        for (int k = 1; k <= K; ++k)
            for (int j = 0; j < d; ++j) z[j] += z_all[k][j] / K;
    } else {
        const auto w = p.row("ring_readout.w");  // 1 x 2d
        std::vector<double> logits(K, 0.0);
        for (int k = 1; k <= K; ++k) {
            double s = 0;
            for (int j = 0; j < d; ++j) s += z_all[0][j] * w[j];
            for (int j = 0; j < d; ++j) s += z_all[k][j] * w[d + j];
            logits[k - 1] = s;
        }
        auto alpha = softmax_vec(logits);
        out.ring_alphas = alpha;
        for (int k = 1; k <= K; ++k)
            for (int j = 0; j < d; ++j) z[j] += alpha[k - 1] * z_all[k][j];
    }

    out.z = z;
    Mat logits = add_bias(mat_mul(Mat{z}, p.mat("cls.w")), p.row("cls.b"));
    out.logits = logits[0];
    return out;
}

}  // namespace oracle

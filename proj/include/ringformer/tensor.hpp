#pragma once

// Dense matrix tensors on a define-by-run gradient tape. The tape records one
// closure per differentiable op; backward() replays them in reverse execution
// order, which is a valid reverse topological order of the forward graph.
// Scalar type is a template parameter: f32 for training, f64 for gradient
// checks and oracles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ringformer/common.hpp"

namespace ringformer {

template <typename Real>
struct TensorNode {
    int rows = 0;
    int cols = 0;
    std::vector<Real> val;
    std::vector<Real> grad;  // allocated lazily, same length as val
    bool requires_grad = false;

    void ensure_grad() {
        if (grad.size() != val.size()) grad.assign(val.size(), Real(0));
    }
};

template <typename Real>
class Tensor {
public:
    Tensor() : n_(std::make_shared<TensorNode<Real>>()) {}

    static Tensor zeros(int rows, int cols, bool requires_grad = false) {
        Tensor t;
        t.n_->rows = rows;
        t.n_->cols = cols;
        t.n_->val.assign(static_cast<std::size_t>(rows) * cols, Real(0));
        t.n_->requires_grad = requires_grad;
        if (requires_grad) t.n_->ensure_grad();
        return t;
    }

    static Tensor from(std::vector<Real> data, int rows, int cols,
                       bool requires_grad = false) {
        if (data.size() != static_cast<std::size_t>(rows) * cols)
            throw ValidationError("tensor data length does not match shape");
        Tensor t;
        t.n_->rows = rows;
        t.n_->cols = cols;
        t.n_->val = std::move(data);
        t.n_->requires_grad = requires_grad;
        if (requires_grad) t.n_->ensure_grad();
        return t;
    }

    int rows() const { return n_->rows; }
    int cols() const { return n_->cols; }
    std::size_t size() const { return n_->val.size(); }

    Real* data() { return n_->val.data(); }
    const Real* data() const { return n_->val.data(); }
    std::vector<Real>& values() { return n_->val; }
    const std::vector<Real>& values() const { return n_->val; }

    Real& at(int r, int c) { return n_->val[static_cast<std::size_t>(r) * cols() + c]; }
    Real at(int r, int c) const { return n_->val[static_cast<std::size_t>(r) * cols() + c]; }

    bool requires_grad() const { return n_->requires_grad; }
    void set_requires_grad(bool b) {
        n_->requires_grad = b;
        if (b) n_->ensure_grad();
    }

    std::vector<Real>& grad() {
        n_->ensure_grad();
        return n_->grad;
    }
    const std::vector<Real>& grad() const {
        n_->ensure_grad();
        return n_->grad;
    }
    void zero_grad() {
        n_->ensure_grad();
        std::fill(n_->grad.begin(), n_->grad.end(), Real(0));
    }

    std::shared_ptr<TensorNode<Real>> node() const { return n_; }

private:
    mutable std::shared_ptr<TensorNode<Real>> n_;
};

template <typename Real>
class Tape {
public:
    void record(std::function<void()> vjp) { entries_.push_back(std::move(vjp)); }

    std::size_t size() const { return entries_.size(); }

    // Seeds d(loss)/d(loss) = seed and runs all recorded VJPs in reverse.
    void backward(Tensor<Real>& loss, Real seed = Real(1)) {
        if (consumed_)
            throw NumericalError("backward called twice on the same tape");
        if (loss.rows() != 1 || loss.cols() != 1)
            throw ValidationError("backward expects a scalar loss");
        consumed_ = true;
        loss.grad()[0] += seed;
        for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
    }

    bool consumed() const { return consumed_; }

private:
    std::vector<std::function<void()>> entries_;
    bool consumed_ = false;
};

namespace detail {

template <typename Real>
bool track(Tape<Real>* tape, std::initializer_list<const Tensor<Real>*> inputs) {
    if (!tape) return false;
    for (const auto* t : inputs)
        if (t->requires_grad()) return true;
    return false;
}

template <typename Real>
void prepare(Tensor<Real>& out, std::initializer_list<Tensor<Real>*> inputs) {
    out.set_requires_grad(true);
    for (auto* t : inputs) t->node()->ensure_grad();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// elementwise and structural ops
// ---------------------------------------------------------------------------

template <typename Real>
Tensor<Real> add(Tape<Real>* tape, Tensor<Real> a, Tensor<Real> b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("add: shape mismatch");
    auto out = Tensor<Real>::zeros(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = a.data()[i] + b.data()[i];
    if (detail::track(tape, {&a, &b})) {
        detail::prepare(out, {&a, &b});
        tape->record([a, b, out]() mutable {
            const auto& g = out.grad();
            if (a.requires_grad())
                for (std::size_t i = 0; i < g.size(); ++i) a.grad()[i] += g[i];
            if (b.requires_grad())
                for (std::size_t i = 0; i < g.size(); ++i) b.grad()[i] += g[i];
        });
    }
    return out;
}

template <typename Real>
Tensor<Real> sub(Tape<Real>* tape, Tensor<Real> a, Tensor<Real> b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("sub: shape mismatch");
    auto out = Tensor<Real>::zeros(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = a.data()[i] - b.data()[i];
    if (detail::track(tape, {&a, &b})) {
        detail::prepare(out, {&a, &b});
        tape->record([a, b, out]() mutable {
            const auto& g = out.grad();
            if (a.requires_grad())
                for (std::size_t i = 0; i < g.size(); ++i) a.grad()[i] += g[i];
            if (b.requires_grad())
                for (std::size_t i = 0; i < g.size(); ++i) b.grad()[i] -= g[i];
        });
    }
    return out;
}

template <typename Real>
Tensor<Real> mul(Tape<Real>* tape, Tensor<Real> a, Tensor<Real> b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("mul: shape mismatch");
    auto out = Tensor<Real>::zeros(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = a.data()[i] * b.data()[i];
    if (detail::track(tape, {&a, &b})) {
        detail::prepare(out, {&a, &b});
        tape->record([a, b, out]() mutable {
            const auto& g = out.grad();
            if (a.requires_grad())
                for (std::size_t i = 0; i < g.size(); ++i) a.grad()[i] += g[i] * b.data()[i];
            if (b.requires_grad())
                for (std::size_t i = 0; i < g.size(); ++i) b.grad()[i] += g[i] * a.data()[i];
        });
    }
    return out;
}

template <typename Real>
Tensor<Real> scale(Tape<Real>* tape, Tensor<Real> a, Real s) {
    auto out = Tensor<Real>::zeros(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = a.data()[i] * s;
    if (detail::track(tape, {&a})) {
        detail::prepare(out, {&a});
        tape->record([a, out, s]() mutable {
            const auto& g = out.grad();
            for (std::size_t i = 0; i < g.size(); ++i) a.grad()[i] += g[i] * s;
        });
    }
    return out;
}

// x: n x d, bias: 1 x d. The only broadcast in the engine.
template <typename Real>
Tensor<Real> add_row_bias(Tape<Real>* tape, Tensor<Real> x, Tensor<Real> bias) {
    if (bias.rows() != 1 || bias.cols() != x.cols())
        throw ValidationError("add_row_bias: bias must be 1 x cols(x)");
    auto out = Tensor<Real>::zeros(x.rows(), x.cols());
    for (int r = 0; r < x.rows(); ++r)
        for (int c = 0; c < x.cols(); ++c) out.at(r, c) = x.at(r, c) + bias.at(0, c);
    if (detail::track(tape, {&x, &bias})) {
        detail::prepare(out, {&x, &bias});
        tape->record([x, bias, out]() mutable {
            const int n = out.rows(), d = out.cols();
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < d; ++c) {
                    const Real g = out.grad()[static_cast<std::size_t>(r) * d + c];
                    if (x.requires_grad()) x.grad()[static_cast<std::size_t>(r) * d + c] += g;
                    if (bias.requires_grad()) bias.grad()[c] += g;
                }
        });
    }
    return out;
}

template <typename Real>
Tensor<Real> matmul(Tape<Real>* tape, Tensor<Real> a, Tensor<Real> b) {
    if (a.cols() != b.rows()) throw ValidationError("matmul: inner dimensions disagree");
    const int n = a.rows(), m = a.cols(), p = b.cols();
    auto out = Tensor<Real>::zeros(n, p);
    for (int i = 0; i < n; ++i) {
        const Real* arow = a.data() + static_cast<std::size_t>(i) * m;
        Real* orow = out.data() + static_cast<std::size_t>(i) * p;
        for (int k = 0; k < m; ++k) {
            const Real aik = arow[k];
            const Real* brow = b.data() + static_cast<std::size_t>(k) * p;
            for (int j = 0; j < p; ++j) orow[j] += aik * brow[j];
        }
    }
    if (detail::track(tape, {&a, &b})) {
        detail::prepare(out, {&a, &b});
        tape->record([a, b, out, n, m, p]() mutable {
            // dA = dC * B^T, dB = A^T * dC
            if (a.requires_grad()) {
                for (int i = 0; i < n; ++i)
                    for (int k = 0; k < m; ++k) {
                        Real acc = 0;
                        const Real* grow = out.grad().data() + static_cast<std::size_t>(i) * p;
                        const Real* brow = b.data() + static_cast<std::size_t>(k) * p;
                        for (int j = 0; j < p; ++j) acc += grow[j] * brow[j];
                        a.grad()[static_cast<std::size_t>(i) * m + k] += acc;
                    }
            }
            if (b.requires_grad()) {
                for (int i = 0; i < n; ++i) {
                    const Real* arow = a.data() + static_cast<std::size_t>(i) * m;
                    const Real* grow = out.grad().data() + static_cast<std::size_t>(i) * p;
                    for (int k = 0; k < m; ++k) {
                        const Real aik = arow[k];
                        Real* bg = b.grad().data() + static_cast<std::size_t>(k) * p;
                        for (int j = 0; j < p; ++j) bg[j] += aik * grow[j];
                    }
                }
            }
        });
    }
    return out;
}

template <typename Real>
Tensor<Real> transpose(Tape<Real>* tape, Tensor<Real> a) {
    auto out = Tensor<Real>::zeros(a.cols(), a.rows());
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) out.at(c, r) = a.at(r, c);
    if (detail::track(tape, {&a})) {
        detail::prepare(out, {&a});
        tape->record([a, out]() mutable {
            for (int r = 0; r < a.rows(); ++r)
                for (int c = 0; c < a.cols(); ++c)
                    a.grad()[static_cast<std::size_t>(r) * a.cols() + c] +=
                        out.grad()[static_cast<std::size_t>(c) * out.cols() + r];
        });
    }
    return out;
}

// Row-stable softmax. `add_mask`, when given, is added to the logits before
// the max-subtraction; it is a constant (1 x cols, applied to every row).
template <typename Real>
Tensor<Real> softmax_rows(Tape<Real>* tape, Tensor<Real> x,
                          const Tensor<Real>* add_mask = nullptr) {
    if (add_mask && (add_mask->rows() != 1 || add_mask->cols() != x.cols()))
        throw ValidationError("softmax_rows: mask must be 1 x cols(x)");
    const int n = x.rows(), d = x.cols();
    auto out = Tensor<Real>::zeros(n, d);
    for (int r = 0; r < n; ++r) {
        Real mx = -std::numeric_limits<Real>::infinity();
        for (int c = 0; c < d; ++c) {
            Real v = x.at(r, c) + (add_mask ? add_mask->at(0, c) : Real(0));
            if (std::isnan(v)) throw NumericalError("softmax_rows: NaN logit");
            mx = std::max(mx, v);
        }
        Real sum = 0;
        for (int c = 0; c < d; ++c) {
            Real v = x.at(r, c) + (add_mask ? add_mask->at(0, c) : Real(0));
            Real e = std::exp(v - mx);
            out.at(r, c) = e;
            sum += e;
        }
        for (int c = 0; c < d; ++c) out.at(r, c) /= sum;
    }
    if (detail::track(tape, {&x})) {
        detail::prepare(out, {&x});
        tape->record([x, out, n, d]() mutable {
            for (int r = 0; r < n; ++r) {
                Real dot = 0;
                for (int c = 0; c < d; ++c)
                    dot += out.grad()[static_cast<std::size_t>(r) * d + c] * out.at(r, c);
                for (int c = 0; c < d; ++c) {
                    const std::size_t i = static_cast<std::size_t>(r) * d + c;
                    x.grad()[i] += out.at(r, c) * (out.grad()[i] - dot);
                }
            }
        });
    }
    return out;
}

// Per-row normalization: y = gain * (x - mean) / sqrt(var + eps) + bias.
// Population variance (divide by d).
template <typename Real>
Tensor<Real> layer_norm(Tape<Real>* tape, Tensor<Real> x, Tensor<Real> gain,
                        Tensor<Real> bias, Real eps) {
    const int n = x.rows(), d = x.cols();
    if (gain.rows() != 1 || gain.cols() != d || bias.rows() != 1 || bias.cols() != d)
        throw ValidationError("layer_norm: gain/bias must be 1 x cols(x)");
    auto out = Tensor<Real>::zeros(n, d);
    std::vector<Real> xhat(static_cast<std::size_t>(n) * d);
    std::vector<Real> inv_std(n);
    for (int r = 0; r < n; ++r) {
        Real mean = 0;
        for (int c = 0; c < d; ++c) mean += x.at(r, c);
        mean /= d;
        Real var = 0;
        for (int c = 0; c < d; ++c) {
            Real v = x.at(r, c) - mean;
            var += v * v;
        }
        var /= d;
        const Real is = Real(1) / std::sqrt(var + eps);
        inv_std[r] = is;
        for (int c = 0; c < d; ++c) {
            const Real h = (x.at(r, c) - mean) * is;
            xhat[static_cast<std::size_t>(r) * d + c] = h;
            out.at(r, c) = gain.at(0, c) * h + bias.at(0, c);
        }
    }
    if (detail::track(tape, {&x, &gain, &bias})) {
        detail::prepare(out, {&x, &gain, &bias});
        tape->record([x, gain, bias, out, xhat = std::move(xhat),
                      inv_std = std::move(inv_std), n, d]() mutable {
            for (int r = 0; r < n; ++r) {
                // dxhat = dy * gain; dx = (dxhat - mean(dxhat) - xhat*mean(dxhat*xhat)) * inv_std
                Real mean_dxh = 0, mean_dxh_xh = 0;
                for (int c = 0; c < d; ++c) {
                    const std::size_t i = static_cast<std::size_t>(r) * d + c;
                    const Real dy = out.grad()[i];
                    const Real dxh = dy * gain.at(0, c);
                    mean_dxh += dxh;
                    mean_dxh_xh += dxh * xhat[i];
                    if (gain.requires_grad()) gain.grad()[c] += dy * xhat[i];
                    if (bias.requires_grad()) bias.grad()[c] += dy;
                }
                mean_dxh /= d;
                mean_dxh_xh /= d;
                if (x.requires_grad()) {
                    for (int c = 0; c < d; ++c) {
                        const std::size_t i = static_cast<std::size_t>(r) * d + c;
                        const Real dxh = out.grad()[i] * gain.at(0, c);
                        x.grad()[i] += (dxh - mean_dxh - xhat[i] * mean_dxh_xh) * inv_std[r];
                    }
                }
            }
        });
    }
    return out;
}

template <typename Real>
Tensor<Real> gelu(Tape<Real>* tape, Tensor<Real> x) {
    auto out = Tensor<Real>::zeros(x.rows(), x.cols());
    constexpr Real inv_sqrt2 = Real(0.7071067811865475244);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Real v = x.data()[i];
        out.data()[i] = Real(0.5) * v * (Real(1) + std::erf(v * inv_sqrt2));
    }
    if (detail::track(tape, {&x})) {
        detail::prepare(out, {&x});
        tape->record([x, out]() mutable {
            constexpr Real is2 = Real(0.7071067811865475244);
            constexpr Real inv_sqrt_2pi = Real(0.3989422804014326779);
            for (std::size_t i = 0; i < x.size(); ++i) {
                const Real v = x.data()[i];
                const Real cdf = Real(0.5) * (Real(1) + std::erf(v * is2));
                const Real pdf = inv_sqrt_2pi * std::exp(Real(-0.5) * v * v);
                x.grad()[i] += out.grad()[i] * (cdf + v * pdf);
            }
        });
    }
    return out;
}

// Inverted dropout with a mask drawn from `rng`. p = 0 or train = false is the
// identity and consumes no randomness.
template <typename Real>
Tensor<Real> dropout(Tape<Real>* tape, Tensor<Real> x, double p, bool train,
                     std::mt19937_64& rng) {
    if (!train || p <= 0.0) return x;
    if (p >= 1.0) throw ValidationError("dropout: p must be < 1");
    auto out = Tensor<Real>::zeros(x.rows(), x.cols());
    std::vector<std::uint8_t> mask(x.size());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Real keep_scale = Real(1.0 / (1.0 - p));
    for (std::size_t i = 0; i < x.size(); ++i) {
        mask[i] = u(rng) >= p ? 1 : 0;
        out.data()[i] = mask[i] ? x.data()[i] * keep_scale : Real(0);
    }
    if (detail::track(tape, {&x})) {
        detail::prepare(out, {&x});
        tape->record([x, out, mask = std::move(mask), keep_scale]() mutable {
            for (std::size_t i = 0; i < x.size(); ++i)
                if (mask[i]) x.grad()[i] += out.grad()[i] * keep_scale;
        });
    }
    return out;
}

template <typename Real>
Tensor<Real> concat_cols(Tape<Real>* tape, Tensor<Real> a, Tensor<Real> b) {
    if (a.rows() != b.rows()) throw ValidationError("concat_cols: row mismatch");
    const int n = a.rows(), da = a.cols(), db = b.cols();
    auto out = Tensor<Real>::zeros(n, da + db);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < da; ++c) out.at(r, c) = a.at(r, c);
        for (int c = 0; c < db; ++c) out.at(r, da + c) = b.at(r, c);
    }
    if (detail::track(tape, {&a, &b})) {
        detail::prepare(out, {&a, &b});
        tape->record([a, b, out, n, da, db]() mutable {
            for (int r = 0; r < n; ++r) {
                if (a.requires_grad())
                    for (int c = 0; c < da; ++c)
                        a.grad()[static_cast<std::size_t>(r) * da + c] +=
                            out.grad()[static_cast<std::size_t>(r) * (da + db) + c];
                if (b.requires_grad())
                    for (int c = 0; c < db; ++c)
                        b.grad()[static_cast<std::size_t>(r) * db + c] +=
                            out.grad()[static_cast<std::size_t>(r) * (da + db) + da + c];
            }
        });
    }
    return out;
}

// Stacks single-or-multi-row tensors of equal width into one matrix.
template <typename Real>
Tensor<Real> concat_rows(Tape<Real>* tape, std::vector<Tensor<Real>> parts) {
    if (parts.empty()) throw ValidationError("concat_rows: no parts");
    const int d = parts[0].cols();
    int n = 0;
    for (const auto& p : parts) {
        if (p.cols() != d) throw ValidationError("concat_rows: column mismatch");
        n += p.rows();
    }
    auto out = Tensor<Real>::zeros(n, d);
    int row = 0;
    for (const auto& p : parts) {
        std::copy(p.data(), p.data() + p.size(),
                  out.data() + static_cast<std::size_t>(row) * d);
        row += p.rows();
    }
    bool any = false;
    if (tape)
        for (const auto& p : parts) any = any || p.requires_grad();
    if (any) {
        out.set_requires_grad(true);
        for (auto& p : parts) p.node()->ensure_grad();
        tape->record([parts, out, d]() mutable {
            int row = 0;
            for (auto& p : parts) {
                if (p.requires_grad())
                    for (std::size_t i = 0; i < p.size(); ++i)
                        p.grad()[i] += out.grad()[static_cast<std::size_t>(row) * d + i];
                row += p.rows();
            }
        });
    }
    return out;
}

template <typename Real>
Tensor<Real> slice_cols(Tape<Real>* tape, Tensor<Real> x, int c0, int c1) {
    if (c0 < 0 || c1 > x.cols() || c0 >= c1) throw ValidationError("slice_cols: bad range");
    const int n = x.rows(), w = c1 - c0;
    auto out = Tensor<Real>::zeros(n, w);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < w; ++c) out.at(r, c) = x.at(r, c0 + c);
    if (detail::track(tape, {&x})) {
        detail::prepare(out, {&x});
        tape->record([x, out, c0, w, n]() mutable {
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < w; ++c)
                    x.grad()[static_cast<std::size_t>(r) * x.cols() + c0 + c] +=
                        out.grad()[static_cast<std::size_t>(r) * w + c];
        });
    }
    return out;
}

template <typename Real>
Tensor<Real> gather_rows(Tape<Real>* tape, Tensor<Real> x, std::vector<int> idx) {
    const int d = x.cols();
    for (int i : idx)
        if (i < 0 || i >= x.rows()) throw ValidationError("gather_rows: index out of range");
    auto out = Tensor<Real>::zeros(static_cast<int>(idx.size()), d);
    for (std::size_t r = 0; r < idx.size(); ++r)
        std::copy(x.data() + static_cast<std::size_t>(idx[r]) * d,
                  x.data() + static_cast<std::size_t>(idx[r] + 1) * d,
                  out.data() + r * d);
    if (detail::track(tape, {&x})) {
        detail::prepare(out, {&x});
        tape->record([x, out, idx = std::move(idx), d]() mutable {
            for (std::size_t r = 0; r < idx.size(); ++r)
                for (int c = 0; c < d; ++c)
                    x.grad()[static_cast<std::size_t>(idx[r]) * d + c] +=
                        out.grad()[r * d + c];
        });
    }
    return out;
}

template <typename Real>
Tensor<Real> repeat_rows(Tape<Real>* tape, Tensor<Real> x, int n) {
    if (x.rows() != 1) throw ValidationError("repeat_rows: input must be a single row");
    const int d = x.cols();
    auto out = Tensor<Real>::zeros(n, d);
    for (int r = 0; r < n; ++r)
        std::copy(x.data(), x.data() + d, out.data() + static_cast<std::size_t>(r) * d);
    if (detail::track(tape, {&x})) {
        detail::prepare(out, {&x});
        tape->record([x, out, n, d]() mutable {
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < d; ++c)
                    x.grad()[c] += out.grad()[static_cast<std::size_t>(r) * d + c];
        });
    }
    return out;
}

template <typename Real>
Tensor<Real> mean_rows(Tape<Real>* tape, Tensor<Real> x) {
    const int n = x.rows(), d = x.cols();
    auto out = Tensor<Real>::zeros(1, d);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) out.at(0, c) += x.at(r, c);
    for (int c = 0; c < d; ++c) out.at(0, c) /= Real(n);
    if (detail::track(tape, {&x})) {
        detail::prepare(out, {&x});
        tape->record([x, out, n, d]() mutable {
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < d; ++c)
                    x.grad()[static_cast<std::size_t>(r) * d + c] += out.grad()[c] / Real(n);
        });
    }
    return out;
}

// Fused log-softmax + negative log-likelihood, averaged over the batch.
template <typename Real>
Tensor<Real> cross_entropy_with_logits(Tape<Real>* tape, Tensor<Real> logits,
                                       const std::vector<int>& labels) {
    const int n = logits.rows(), c = logits.cols();
    if (static_cast<int>(labels.size()) != n)
        throw ValidationError("cross_entropy: label count mismatch");
    for (int y : labels)
        if (y < 0 || y >= c) throw ValidationError("cross_entropy: label out of range");
    std::vector<Real> probs(static_cast<std::size_t>(n) * c);
    Real loss = 0;
    for (int r = 0; r < n; ++r) {
        Real mx = logits.at(r, 0);
        for (int j = 1; j < c; ++j) mx = std::max(mx, logits.at(r, j));
        Real sum = 0;
        for (int j = 0; j < c; ++j) {
            Real e = std::exp(logits.at(r, j) - mx);
            probs[static_cast<std::size_t>(r) * c + j] = e;
            sum += e;
        }
        for (int j = 0; j < c; ++j) probs[static_cast<std::size_t>(r) * c + j] /= sum;
        loss -= std::log(probs[static_cast<std::size_t>(r) * c + labels[r]]);
    }
    auto out = Tensor<Real>::from({loss / Real(n)}, 1, 1);
    if (detail::track(tape, {&logits})) {
        detail::prepare(out, {&logits});
        tape->record([logits, out, probs = std::move(probs), labels, n, c]() mutable {
            const Real g = out.grad()[0] / Real(n);
            for (int r = 0; r < n; ++r)
                for (int j = 0; j < c; ++j) {
                    const std::size_t i = static_cast<std::size_t>(r) * c + j;
                    logits.grad()[i] += g * (probs[i] - (labels[r] == j ? Real(1) : Real(0)));
                }
        });
    }
    return out;
}

}  // namespace ringformer

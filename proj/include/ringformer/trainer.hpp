#pragma once

// Semi-supervised training: batched cross-entropy over labeled target nodes,
// Adam with decoupled weight decay, seeded shuffling, early stopping on the
// validation micro-F1 of the model's own classifier head. Fully deterministic
// given (seed, config, data).

#include <algorithm>
#include <functional>
#include <random>

#include "ringformer/model.hpp"
#include "ringformer/serialize.hpp"

namespace ringformer {

struct TrainConfig {
    double lr = 1e-3;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int epochs = 200;
    int batch_size = 64;
    int eval_every = 1;
    int patience = 30;
    std::uint64_t seed = 42;
    double val_frac = 0.1;

    void check() const {
        if (lr <= 0) throw ValidationError("TrainConfig: lr must be positive");
        if (val_frac <= 0 || val_frac >= 1)
            throw ValidationError("TrainConfig: val_frac must be in (0, 1)");
        if (epochs < 1 || batch_size < 1 || eval_every < 1)
            throw ValidationError("TrainConfig: epochs/batch_size/eval_every must be >= 1");
    }
};

template <typename Real>
struct AdamState {
    struct Slot {
        std::vector<Real> m, v;
    };
    std::vector<Slot> slots;
    std::int64_t step = 0;
};

// One Adam update over every parameter tensor with an accumulated gradient;
// gradients are zeroed afterwards. Weight decay is decoupled (a no-op at 0).
template <typename Real>
void adam_step(ModelParams<Real>& params, AdamState<Real>& state, const TrainConfig& cfg) {
    if (state.slots.empty()) {
        params.for_each([&](const std::string&, Tensor<Real>& t) {
            state.slots.push_back({std::vector<Real>(t.size(), Real(0)),
                                   std::vector<Real>(t.size(), Real(0))});
        });
    }
    ++state.step;
    const double b1 = cfg.beta1, b2 = cfg.beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    std::size_t slot = 0;
    params.for_each([&](const std::string&, Tensor<Real>& t) {
        auto& s = state.slots[slot++];
        auto& g = t.grad();
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double gi = static_cast<double>(g[i]);
            s.m[i] = static_cast<Real>(b1 * s.m[i] + (1.0 - b1) * gi);
            s.v[i] = static_cast<Real>(b2 * s.v[i] + (1.0 - b2) * gi * gi);
            const double mhat = static_cast<double>(s.m[i]) / bias1;
            const double vhat = static_cast<double>(s.v[i]) / bias2;
            double update = cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
            if (cfg.weight_decay != 0.0)
                update += cfg.lr * cfg.weight_decay * static_cast<double>(t.data()[i]);
            t.data()[i] = static_cast<Real>(static_cast<double>(t.data()[i]) - update);
            g[i] = Real(0);
        }
    });
}

struct HistoryRow {
    int epoch = 0;
    double train_loss = 0;
    double val_loss = 0;
    double val_micro_f1 = 0;
};

template <typename Real>
struct TrainResult {
    ModelParams<Real> best_params;
    ModelParams<Real> final_params;
    std::vector<HistoryRow> history;
    int best_epoch = -1;
    double best_val_f1 = -1;
    int epochs_run = 0;
};

namespace detail {

// Stratified split of labeled nodes into train/val, seeded.
inline void split_labeled(const std::vector<std::int32_t>& nodes,
                          const std::vector<std::int32_t>& labels, double val_frac,
                          std::uint64_t seed, std::vector<std::int32_t>& train,
                          std::vector<std::int32_t>& val) {
    std::unordered_map<int, std::vector<std::int32_t>> by_class;
    for (auto u : nodes) by_class[labels[u]].push_back(u);
    std::mt19937_64 rng(seed ^ 0x5b17a1d3c2e94f07ull);
    std::vector<int> classes;
    for (auto& [c, v] : by_class) classes.push_back(c);
    std::sort(classes.begin(), classes.end());
    for (int c : classes) {
        auto& v = by_class[c];
        std::sort(v.begin(), v.end());
        std::shuffle(v.begin(), v.end(), rng);
        std::size_t n_val = static_cast<std::size_t>(v.size() * val_frac);
        if (v.size() >= 2 && n_val == 0) n_val = 1;
        if (n_val >= v.size()) n_val = v.size() - 1;
        for (std::size_t i = 0; i < v.size(); ++i)
            (i < n_val ? val : train).push_back(v[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
}

}  // namespace detail

template <typename Real>
int predict_class(const ForwardOutput<Real>& out) {
    int best = 0;
    for (int j = 1; j < out.logits.cols(); ++j)
        if (out.logits.at(0, j) > out.logits.at(0, best)) best = j;
    return best;
}

template <typename Real>
TrainResult<Real> train_model(const HinGraph& g, const VariantTokenSource& tokens,
                              const ModelConfig& mcfg, const TrainConfig& tcfg,
                              std::ostream* log = nullptr,
                              const std::function<void(const HistoryRow&)>& on_epoch = {}) {
    mcfg.check();
    tcfg.check();
    auto labeled = g.labeled_nodes();
    if (labeled.empty()) throw ValidationError("train: graph has no labeled nodes");

    std::vector<std::int32_t> train_nodes, val_nodes;
    detail::split_labeled(labeled, g.labels, tcfg.val_frac, tcfg.seed, train_nodes, val_nodes);
    if (train_nodes.empty() || val_nodes.empty())
        throw ValidationError("train: train/val split produced an empty side");

    // cache variant token blocks once; BFS re-pooling is cheap but repeated
    std::unordered_map<std::int32_t, TokenTensor> block;
    for (auto u : labeled) block.emplace(u, tokens.get(u));

    auto params = ModelParams<Real>::init(mcfg, g.feat_dim, g.num_classes);
    params.set_requires_grad(true);
    AdamState<Real> adam;
    std::mt19937_64 shuffle_rng(tcfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::mt19937_64 dropout_rng(tcfg.seed ^ 0x2545f4914f6cdd1dull);

    TrainResult<Real> result;
    result.best_params = params.clone();

    auto eval_split = [&](const std::vector<std::int32_t>& nodes, double& loss, double& f1) {
        std::mt19937_64 eval_rng(0);  // unused: eval mode draws nothing
        double total = 0;
        std::int64_t correct = 0;
        for (auto u : nodes) {
            auto out = hhgt_forward<Real>(nullptr, block.at(u), params, mcfg, false, eval_rng);
            auto ce = cross_entropy_with_logits<Real>(nullptr, out.logits, {g.labels[u]});
            total += static_cast<double>(ce.at(0, 0));
            if (predict_class(out) == g.labels[u]) ++correct;
        }
        loss = total / static_cast<double>(nodes.size());
        // micro-F1 equals accuracy for single-label multiclass prediction
        f1 = static_cast<double>(correct) / static_cast<double>(nodes.size());
    };

    int epochs_since_best = 0;
    for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        std::vector<std::int32_t> order = train_nodes;
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_loss = 0;
        for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
            const Real inv_batch = Real(1) / static_cast<Real>(end - start);
            for (std::size_t i = start; i < end; ++i) {
                const std::int32_t u = order[i];
                Tape<Real> tape;
                auto out = hhgt_forward<Real>(&tape, block.at(u), params, mcfg, true, dropout_rng);
                auto loss = cross_entropy_with_logits<Real>(&tape, out.logits, {g.labels[u]});
                const double lv = static_cast<double>(loss.at(0, 0));
                if (!std::isfinite(lv))
                    throw NumericalError("train: loss diverged (NaN/inf) at epoch " +
                                         std::to_string(epoch) + ", node " + std::to_string(u));
                epoch_loss += lv;
                tape.backward(loss, inv_batch);  // batch-mean gradients
            }
            adam_step(params, adam, tcfg);
        }
        epoch_loss /= static_cast<double>(order.size());

        HistoryRow row;
        row.epoch = epoch;
        row.train_loss = epoch_loss;
        if (epoch % tcfg.eval_every == 0 || epoch == tcfg.epochs) {
            eval_split(val_nodes, row.val_loss, row.val_micro_f1);
            if (row.val_micro_f1 > result.best_val_f1) {
                result.best_val_f1 = row.val_micro_f1;
                result.best_epoch = epoch;
                result.best_params = params.clone();
                epochs_since_best = 0;
            } else {
                epochs_since_best += tcfg.eval_every;
            }
        }
        result.history.push_back(row);
        result.epochs_run = epoch;
        if (log)
            *log << "epoch " << epoch << " train_loss " << row.train_loss << " val_loss "
                 << row.val_loss << " val_micro_f1 " << row.val_micro_f1 << "\n";
        if (on_epoch) on_epoch(row);
        if (tcfg.patience > 0 && epochs_since_best >= tcfg.patience) break;
    }

    result.final_params = params.clone();
    return result;
}

// Embeds the listed nodes with the given parameters (eval mode).
template <typename Real>
EmbeddingMatrix embed_nodes(const VariantTokenSource& tokens,
                            const std::vector<std::int32_t>& nodes,
                            ModelParams<Real>& params, const ModelConfig& mcfg) {
    EmbeddingMatrix m;
    m.dim = params.d;
    m.node_ids.reserve(nodes.size());
    m.data.reserve(nodes.size() * static_cast<std::size_t>(params.d));
    std::mt19937_64 rng(0);
    for (auto u : nodes) {
        auto out = hhgt_forward<Real>(nullptr, tokens.get(u), params, mcfg, false, rng);
        m.node_ids.push_back(u);
        for (int j = 0; j < params.d; ++j)
            m.data.push_back(static_cast<float>(out.embedding.at(0, j)));
    }
    return m;
}

}  // namespace ringformer

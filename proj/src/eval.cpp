#include "ringformer/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "ringformer/common.hpp"

namespace ringformer {

namespace {

// Stratified index split; every class keeps at least one train member, and at
// least one test member when it has two or more.
void stratified_split(const std::vector<int>& labels, double train_frac,
                      std::mt19937_64& rng, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& test) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    train.clear();
    test.clear();
    for (auto& [c, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        std::size_t n_train = static_cast<std::size_t>(std::llround(train_frac * idx.size()));
        n_train = std::max<std::size_t>(1, n_train);
        if (idx.size() >= 2 && n_train >= idx.size()) n_train = idx.size() - 1;
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_train ? train : test).push_back(idx[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
}

struct LinearModel {
    int dim = 0;
    int classes = 0;
    std::vector<double> w;  // classes x dim
    std::vector<double> b;  // classes

    double score(int c, const double* x) const {
        double f = b[c];
        const double* wc = w.data() + static_cast<std::size_t>(c) * dim;
        for (int j = 0; j < dim; ++j) f += wc[j] * x[j];
        return f;
    }
    int predict(const double* x) const {
        int best = 0;
        double best_f = score(0, x);
        for (int c = 1; c < classes; ++c) {
            const double f = score(c, x);
            if (f > best_f) {
                best_f = f;
                best = c;
            }
        }
        return best;
    }
};

// One-vs-rest linear classifier trained by per-sample SGD with Polyak tail
// averaging over the second half of the updates. For `svm` the per-class
// objective is (l2/2)||w||^2 + mean_i max(0, 1 - y_i f_i)^2, for `logreg` the
// logistic loss with the same regularizer.
LinearModel train_linear(const std::vector<double>& x, int dim,
                         const std::vector<int>& y, int classes, ProbeKind kind,
                         int epochs, double lr0, double l2, std::mt19937_64& rng) {
    const std::size_t n = y.size();
    LinearModel m;
    m.dim = dim;
    m.classes = classes;
    m.w.assign(static_cast<std::size_t>(classes) * dim, 0.0);
    m.b.assign(classes, 0.0);
    LinearModel avg = m;
    std::int64_t avg_count = 0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::int64_t total = static_cast<std::int64_t>(epochs) * static_cast<std::int64_t>(n);
    std::int64_t t = 0;
    for (int e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) {
            const double* xi = x.data() + i * dim;
            const double eta = lr0 / (1.0 + lr0 * l2 * static_cast<double>(t));
            for (int c = 0; c < classes; ++c) {
                const double yi = y[i] == c ? 1.0 : -1.0;
                const double f = m.score(c, xi);
                double coef;  // d(loss)/d(f)
                if (kind == ProbeKind::svm) {
                    const double margin = 1.0 - yi * f;
                    coef = margin > 0 ? -2.0 * margin * yi : 0.0;
                } else {
                    coef = -yi / (1.0 + std::exp(yi * f));
                }
                double* wc = m.w.data() + static_cast<std::size_t>(c) * dim;
                for (int j = 0; j < dim; ++j)
                    wc[j] -= eta * (l2 * wc[j] + coef * xi[j]);
                m.b[c] -= eta * coef;
            }
            ++t;
            if (t * 2 >= total) {
                ++avg_count;
                for (std::size_t j = 0; j < m.w.size(); ++j)
                    avg.w[j] += (m.w[j] - avg.w[j]) / static_cast<double>(avg_count);
                for (int c = 0; c < classes; ++c)
                    avg.b[c] += (m.b[c] - avg.b[c]) / static_cast<double>(avg_count);
            }
        }
    }
    return avg_count > 0 ? avg : m;
}

}  // namespace

void probe_once(const std::vector<double>& x, std::size_t n, int dim,
                const std::vector<int>& labels, double train_frac, std::uint64_t seed,
                ProbeKind kind, int epochs, double lr, double l2,
                std::vector<int>& test_true, std::vector<int>& test_pred) {
    if (labels.size() != n || x.size() != n * static_cast<std::size_t>(dim))
        throw ValidationError("probe: input size mismatch");
    int classes = 0;
    for (int yv : labels) {
        if (yv < 0) throw ValidationError("probe: negative label");
        classes = std::max(classes, yv + 1);
    }

    std::vector<bool> exists(classes, false);
    for (int yv : labels) exists[yv] = true;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> train_idx, test_idx;
    for (int attempt = 0;; ++attempt) {
        stratified_split(labels, train_frac, rng, train_idx, test_idx);
        std::vector<bool> present(classes, false);
        for (auto i : train_idx) present[labels[i]] = true;
        bool ok = true;
        for (int c = 0; c < classes; ++c)
            if (exists[c] && !present[c]) ok = false;
        if (ok || attempt >= 100) break;  // redraw when a class is missing
    }
    if (test_idx.empty()) throw ValidationError("probe: empty test fold");

    // standardize with train-fold statistics, then scale by 1/sqrt(dim) so
    // sample norms are O(1) for the SGD step size
    std::vector<double> mean(dim, 0.0), inv_std(dim, 0.0);
    for (auto i : train_idx)
        for (int j = 0; j < dim; ++j) mean[j] += x[i * dim + j];
    for (int j = 0; j < dim; ++j) mean[j] /= static_cast<double>(train_idx.size());
    for (auto i : train_idx)
        for (int j = 0; j < dim; ++j) {
            const double d = x[i * dim + j] - mean[j];
            inv_std[j] += d * d;
        }
    const double dim_scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int j = 0; j < dim; ++j) {
        const double sd = std::sqrt(inv_std[j] / static_cast<double>(train_idx.size()));
        inv_std[j] = (sd > 1e-12 ? 1.0 / sd : 0.0) * dim_scale;
    }
    auto standardize = [&](const std::vector<std::size_t>& idx, std::vector<double>& out) {
        out.resize(idx.size() * static_cast<std::size_t>(dim));
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (int j = 0; j < dim; ++j)
                out[r * dim + j] = (x[idx[r] * dim + j] - mean[j]) * inv_std[j];
    };
    std::vector<double> x_train, x_test;
    standardize(train_idx, x_train);
    standardize(test_idx, x_test);
    std::vector<int> y_train(train_idx.size());
    for (std::size_t r = 0; r < train_idx.size(); ++r) y_train[r] = labels[train_idx[r]];

    auto model = train_linear(x_train, dim, y_train, classes, kind, epochs, lr, l2, rng);

    test_true.resize(test_idx.size());
    test_pred.resize(test_idx.size());
    for (std::size_t r = 0; r < test_idx.size(); ++r) {
        test_true[r] = labels[test_idx[r]];
        test_pred[r] = model.predict(x_test.data() + r * dim);
    }
}

EvalReport classify_embeddings(const std::vector<double>& x, std::size_t n, int dim,
                               const std::vector<int>& labels, const ProbeOptions& opts) {
    if (opts.repeats < 1) throw ValidationError("classify: repeats must be >= 1");
    EvalReport rep;
    rep.task = "classification";
    rep.split = "stratified " + std::to_string(static_cast<int>(opts.train_frac * 100)) +
                "/" + std::to_string(100 - static_cast<int>(opts.train_frac * 100));
    rep.repeats = opts.repeats;
    rep.seed = opts.seed;
    rep.macro_f1.resize(opts.repeats);
    rep.micro_f1.resize(opts.repeats);
    for (int r = 0; r < opts.repeats; ++r)
        rep.repeat_seeds.push_back(opts.seed + static_cast<std::uint64_t>(r));

    auto work = [&](int begin, int end) {
        for (int r = begin; r < end; ++r) {
            std::vector<int> yt, yp;
            probe_once(x, n, dim, labels, opts.train_frac, rep.repeat_seeds[r], opts.kind,
                       opts.epochs, opts.lr, opts.l2, yt, yp);
            rep.macro_f1[r] = macro_f1(yt, yp);
            rep.micro_f1[r] = micro_f1(yt, yp);
        }
    };
    const int threads = std::max(1, opts.threads);
    if (threads == 1 || opts.repeats < 2) {
        work(0, opts.repeats);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (opts.repeats + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            int b = std::min(opts.repeats, t * chunk);
            int e = std::min(opts.repeats, b + chunk);
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }
    rep.mean_macro_f1 = std::accumulate(rep.macro_f1.begin(), rep.macro_f1.end(), 0.0) /
                        std::max(1, opts.repeats);
    rep.mean_micro_f1 = std::accumulate(rep.micro_f1.begin(), rep.micro_f1.end(), 0.0) /
                        std::max(1, opts.repeats);
    return rep;
}

EvalReport cluster_embeddings(const std::vector<double>& x, std::size_t n, int dim,
                              const std::vector<int>& labels, const ClusterOptions& opts) {
    if (opts.repeats < 1) throw ValidationError("cluster: repeats must be >= 1");
    if (labels.size() != n) throw ValidationError("cluster: label count mismatch");
    int k = opts.k;
    if (k <= 0) {
        std::vector<int> uniq(labels);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        k = static_cast<int>(uniq.size());
    }
    EvalReport rep;
    rep.task = "clustering";
    rep.split = "k=" + std::to_string(k);
    rep.repeats = opts.repeats;
    rep.seed = opts.seed;
    for (int r = 0; r < opts.repeats; ++r)
        rep.repeat_seeds.push_back(opts.seed + static_cast<std::uint64_t>(r));

    auto runs = kmeans_repeats(x, n, dim, k, opts.repeats, opts.seed, opts.threads);
    rep.nmi.resize(opts.repeats);
    rep.ari.resize(opts.repeats);
    for (int r = 0; r < opts.repeats; ++r) {
        rep.nmi[r] = nmi(labels, runs[r].assignment);
        rep.ari[r] = ari(labels, runs[r].assignment);
    }
    rep.mean_nmi =
        std::accumulate(rep.nmi.begin(), rep.nmi.end(), 0.0) / std::max(1, opts.repeats);
    rep.mean_ari =
        std::accumulate(rep.ari.begin(), rep.ari.end(), 0.0) / std::max(1, opts.repeats);
    return rep;
}

}  // namespace ringformer

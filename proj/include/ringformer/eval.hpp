#pragma once

// Downstream evaluation of frozen embeddings: linear-probe classification
// (Macro/Micro-F1 over stratified 80/20 splits) and k-means clustering
// (NMI/ARI against the ground-truth labels), each repeated with independent
// seeds and averaged.

#include <cstdint>
#include <string>
#include <vector>

#include "ringformer/kmeans.hpp"
#include "ringformer/metrics.hpp"

namespace ringformer {

enum class ProbeKind { svm, logreg };

struct EvalReport {
    std::string task;   // "classification" | "clustering"
    std::string split;  // e.g. "stratified 80/20"
    int repeats = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> repeat_seeds;

    std::vector<double> macro_f1, micro_f1;  // classification, per repeat
    std::vector<double> nmi, ari;            // clustering, per repeat

    double mean_macro_f1 = 0, mean_micro_f1 = 0;
    double mean_nmi = 0, mean_ari = 0;
};

struct ProbeOptions {
    double train_frac = 0.8;
    int repeats = 10;
    std::uint64_t seed = 0;
    ProbeKind kind = ProbeKind::svm;
    int threads = 1;
    // SGD hyperparameters of the probe itself
    int epochs = 50;
    double lr = 0.5;
    double l2 = 1e-4;
};

// Stratified split, one-vs-rest linear classifier trained by SGD on the
// train fold, metrics on the held-out fold. Embeddings are standardized with
// train-fold statistics only.
EvalReport classify_embeddings(const std::vector<double>& x, std::size_t n, int dim,
                               const std::vector<int>& labels, const ProbeOptions& opts);

// Single-split probe returning the held-out predictions; exposed for tests.
void probe_once(const std::vector<double>& x, std::size_t n, int dim,
                const std::vector<int>& labels, double train_frac, std::uint64_t seed,
                ProbeKind kind, int epochs, double lr, double l2,
                std::vector<int>& test_true, std::vector<int>& test_pred);

struct ClusterOptions {
    int k = 0;  // 0: use the number of distinct labels
    int repeats = 10;
    std::uint64_t seed = 0;
    int threads = 1;
};

EvalReport cluster_embeddings(const std::vector<double>& x, std::size_t n, int dim,
                              const std::vector<int>& labels, const ClusterOptions& opts);

}  // namespace ringformer

#pragma once

#include <vector>

namespace ringformer {

// Per-class F1 averaged without weights, over all class ids present in either
// argument. Classes with an empty denominator contribute 0.
double macro_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Globally pooled F1; equals accuracy for single-label multiclass prediction.
double micro_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Mutual information normalized by the arithmetic mean of the entropies
// (natural log). Two constant partitions score 1; one constant side scores 0.
double nmi(const std::vector<int>& a, const std::vector<int>& b);

// Adjusted Rand index via pair counting with hypergeometric chance correction.
// Degenerate cases with zero denominator (both partitions trivial) score 1.
double ari(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace ringformer

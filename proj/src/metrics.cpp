#include "ringformer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

namespace ringformer {

namespace {

void check_same_size(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("metric inputs must be non-empty and equal-sized");
}

// contingency counts keyed by (label_a, label_b)
std::map<std::pair<int, int>, std::int64_t> contingency(const std::vector<int>& a,
                                                        const std::vector<int>& b) {
    std::map<std::pair<int, int>, std::int64_t> c;
    for (std::size_t i = 0; i < a.size(); ++i) ++c[{a[i], b[i]}];
    return c;
}

std::map<int, std::int64_t> marginal(const std::vector<int>& v) {
    std::map<int, std::int64_t> m;
    for (int x : v) ++m[x];
    return m;
}

double comb2(std::int64_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

}  // namespace

double macro_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    check_same_size(y_true, y_pred);
    int max_class = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        max_class = std::max({max_class, y_true[i], y_pred[i]});
    const int c = max_class + 1;
    std::vector<std::int64_t> tp(c, 0), fp(c, 0), fn(c, 0);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == y_pred[i]) {
            ++tp[y_true[i]];
        } else {
            ++fp[y_pred[i]];
            ++fn[y_true[i]];
        }
    }
    double sum = 0;
    for (int j = 0; j < c; ++j) {
        const double denom = static_cast<double>(2 * tp[j] + fp[j] + fn[j]);
        sum += denom > 0 ? 2.0 * static_cast<double>(tp[j]) / denom : 0.0;
    }
    return sum / static_cast<double>(c);
}

double micro_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    check_same_size(y_true, y_pred);
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == y_pred[i]) {
            ++tp;
        } else {
            ++fp;
            ++fn;
        }
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    return denom > 0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
}

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
    check_same_size(a, b);
    const double n = static_cast<double>(a.size());
    auto ma = marginal(a);
    auto mb = marginal(b);
    double ha = 0, hb = 0;
    for (const auto& [k, cnt] : ma) {
        const double p = cnt / n;
        ha -= p * std::log(p);
    }
    for (const auto& [k, cnt] : mb) {
        const double p = cnt / n;
        hb -= p * std::log(p);
    }
    if (ha <= 0 && hb <= 0) return 1.0;  // both constant: identical structure
    if (ha <= 0 || hb <= 0) return 0.0;
    double mi = 0;
    for (const auto& [key, cnt] : contingency(a, b)) {
        const double pij = cnt / n;
        const double pi = ma[key.first] / n;
        const double pj = mb[key.second] / n;
        mi += pij * std::log(pij / (pi * pj));
    }
    if (mi < 0) mi = 0;  // guard tiny negative rounding
    return mi / (0.5 * (ha + hb));
}

double ari(const std::vector<int>& a, const std::vector<int>& b) {
    check_same_size(a, b);
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    double sum_ij = 0;
    for (const auto& [key, cnt] : contingency(a, b)) sum_ij += comb2(cnt);
    double sum_a = 0, sum_b = 0;
    for (const auto& [k, cnt] : marginal(a)) sum_a += comb2(cnt);
    for (const auto& [k, cnt] : marginal(b)) sum_b += comb2(cnt);
    const double total = comb2(n);
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;  // both trivial partitions
    return (sum_ij - expected) / (max_index - expected);
}

}  // namespace ringformer

#include "ringformer/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <thread>

#include "ringformer/common.hpp"

namespace ringformer {

namespace {

double sq_dist(const double* a, const double* b, int dim) {
    double s = 0;
    for (int j = 0; j < dim; ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

std::size_t count_distinct(const std::vector<double>& pts, std::size_t n, int dim) {
    std::set<std::vector<double>> uniq;
    for (std::size_t i = 0; i < n; ++i)
        uniq.emplace(pts.begin() + i * dim, pts.begin() + (i + 1) * dim);
    return uniq.size();
}

}  // namespace

KmeansResult kmeans(const std::vector<double>& points, std::size_t n, int dim, int k,
                    std::uint64_t seed, int max_iters, double tol) {
    if (n == 0 || dim <= 0 || points.size() != n * static_cast<std::size_t>(dim))
        throw ValidationError("kmeans: bad input matrix");
    if (k < 1) throw ValidationError("kmeans: k must be >= 1");
    if (static_cast<std::size_t>(k) > count_distinct(points, n, dim))
        throw ValidationError("kmeans: k exceeds the number of distinct points");

    std::mt19937_64 rng(seed);
    const double* p = points.data();

    // k-means++ seeding
    std::vector<double> centroids(static_cast<std::size_t>(k) * dim);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t first = pick(rng);
    std::copy(p + first * dim, p + (first + 1) * dim, centroids.begin());
    std::vector<double> min_d2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (int cc = 0; cc < c; ++cc)
                best = std::min(best, sq_dist(p + i * dim, centroids.data() + cc * dim, dim));
            min_d2[i] = best;
            total += best;
        }
        std::size_t chosen = 0;
        if (total > 0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(rng), acc = 0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_d2[i];
                if (acc >= r) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        std::copy(p + chosen * dim, p + (chosen + 1) * dim, centroids.begin() + c * dim);
    }

    KmeansResult res;
    res.assignment.assign(n, 0);
    std::vector<double> next(centroids.size());
    std::vector<std::int64_t> counts(k);
    for (int iter = 0; iter < max_iters; ++iter) {
        res.iterations = iter + 1;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            int arg = 0;
            for (int c = 0; c < k; ++c) {
                const double d = sq_dist(p + i * dim, centroids.data() + c * dim, dim);
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            res.assignment[i] = arg;
        }
        std::fill(next.begin(), next.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const int c = res.assignment[i];
            ++counts[c];
            for (int j = 0; j < dim; ++j) next[c * dim + j] += p[i * dim + j];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (int j = 0; j < dim; ++j) next[c * dim + j] /= counts[c];
            } else {
                // empty cluster: reseed at the point farthest from its centroid
                double worst = -1;
                std::size_t far = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = sq_dist(p + i * dim,
                                             centroids.data() + res.assignment[i] * dim, dim);
                    if (d > worst) {
                        worst = d;
                        far = i;
                    }
                }
                std::copy(p + far * dim, p + (far + 1) * dim, next.begin() + c * dim);
            }
        }
        double shift = 0;
        for (std::size_t i = 0; i < centroids.size(); ++i) {
            const double d = next[i] - centroids[i];
            shift += d * d;
        }
        centroids.swap(next);
        if (shift < tol * tol) break;
    }

    // final assignment + inertia against the converged centroids
    res.inertia = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::max();
        int arg = 0;
        for (int c = 0; c < k; ++c) {
            const double d = sq_dist(p + i * dim, centroids.data() + c * dim, dim);
            if (d < best) {
                best = d;
                arg = c;
            }
        }
        res.assignment[i] = arg;
        res.inertia += best;
    }
    return res;
}

std::vector<KmeansResult> kmeans_repeats(const std::vector<double>& points, std::size_t n,
                                         int dim, int k, int repeats, std::uint64_t seed,
                                         int threads) {
    std::vector<KmeansResult> out(repeats);
    auto work = [&](int begin, int end) {
        for (int r = begin; r < end; ++r)
            out[r] = kmeans(points, n, dim, k, seed + static_cast<std::uint64_t>(r));
    };
    threads = std::max(1, threads);
    if (threads == 1 || repeats < 2) {
        work(0, repeats);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (repeats + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            int b = std::min(repeats, t * chunk);
            int e = std::min(repeats, b + chunk);
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

}  // namespace ringformer

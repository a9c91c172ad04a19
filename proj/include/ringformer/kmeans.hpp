#pragma once

#include <cstdint>
#include <vector>

namespace ringformer {

struct KmeansResult {
    std::vector<int> assignment;
    double inertia = 0;
    int iterations = 0;
};

// k-means++ seeding then Lloyd iterations until the total centroid shift
// drops below `tol` or `max_iters` is reached. Throws when k exceeds the
// number of distinct points.
KmeansResult kmeans(const std::vector<double>& points, std::size_t n, int dim, int k,
                    std::uint64_t seed, int max_iters = 300, double tol = 1e-6);

// Independent seeded restarts (seed + i), optionally run on several threads;
// results are returned in seed order regardless of scheduling.
std::vector<KmeansResult> kmeans_repeats(const std::vector<double>& points, std::size_t n,
                                         int dim, int k, int repeats, std::uint64_t seed,
                                         int threads = 1);

}  // namespace ringformer

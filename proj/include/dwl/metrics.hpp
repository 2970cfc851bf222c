#pragma once

#include <cstdint>
#include <vector>

#include "dwl/matrix.hpp"
#include "dwl/rng.hpp"

namespace dwl {

// Cluster assignment, one non-negative label per sample. Labels need not be
// contiguous.
using Partition = std::vector<int>;

struct ConfusionMatrix {
    std::size_t k = 0;
    std::vector<long long> counts;  // k x k, rows = true class, cols = predicted

    long long at(std::size_t truth, std::size_t pred) const { return counts[truth * k + pred]; }
    long long total() const {
        long long t = 0;
        for (long long c : counts) t += c;
        return t;
    }
};

// Fraction of exact matches.
double accuracy(const Partition& pred, const Partition& truth);

// Hubert-Arabie adjusted Rand index. Returns 1 when the chance-corrected
// denominator is zero and the partitions are identical, 0 when it is zero
// otherwise.
double adjusted_rand_index(const Partition& a, const Partition& b);

// Lloyd's algorithm on row vectors of `features` (N x d). Initial centroids
// are k distinct seeded sample indices; an emptied cluster is reseeded to the
// point farthest from its assigned centroid. Assignment ties go to the
// lowest centroid index. Deterministic given the seed.
Partition kmeans(const RealMatrix& features, std::size_t k, std::uint64_t seed,
                 std::size_t max_iter = 100);

// adjusted_rand_index(kmeans(features, #distinct truth labels, seed), truth)
double feature_ari(const RealMatrix& features, const Partition& truth_labels,
                   std::uint64_t seed);

ConfusionMatrix confusion(const Partition& pred, const Partition& truth, std::size_t k);

}  // namespace dwl

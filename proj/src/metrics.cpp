#include "dwl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "dwl/errors.hpp"

namespace dwl {

double accuracy(const Partition& pred, const Partition& truth) {
    if (pred.size() != truth.size())
        throw LengthMismatch("accuracy: partition lengths differ");
    if (pred.empty()) throw LengthMismatch("accuracy: empty partitions");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
    if (a.size() != b.size())
        throw LengthMismatch("adjusted_rand_index: partition lengths differ");
    const std::size_t n = a.size();
    if (n < 2) throw LengthMismatch("adjusted_rand_index: need at least 2 samples");

    std::map<std::pair<int, int>, long long> cells;
    std::map<int, long long> row_sums, col_sums;
    for (std::size_t i = 0; i < n; ++i) {
        ++cells[{a[i], b[i]}];
        ++row_sums[a[i]];
        ++col_sums[b[i]];
    }
    auto comb2 = [](long long c) { return 0.5 * static_cast<double>(c) *
                                          static_cast<double>(c - 1); };
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [key, c] : cells) sum_cells += comb2(c);
    for (const auto& [key, c] : row_sums) sum_rows += comb2(c);
    for (const auto& [key, c] : col_sums) sum_cols += comb2(c);

    const double total_pairs = comb2(static_cast<long long>(n));
    const double expected = sum_rows * sum_cols / total_pairs;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    const double denom = max_index - expected;
    if (denom == 0.0) {
        // both all-singletons or both one-cluster; identical iff the
        // co-membership relations agree, which the cell structure decides
        const bool identical = cells.size() == row_sums.size() &&
                               cells.size() == col_sums.size();
        return identical ? 1.0 : 0.0;
    }
    return (sum_cells - expected) / denom;
}

Partition kmeans(const RealMatrix& features, std::size_t k, std::uint64_t seed,
                 std::size_t max_iter) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    if (k == 0 || k > n)
        throw BadK("kmeans: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) +
                   "]");

    SeededRng rng(seed);
    // k distinct sample indices as initial centroids
    std::vector<std::size_t> init;
    std::set<std::size_t> seen;
    while (init.size() < k) {
        const std::size_t idx = rng.uniform_u64(n);
        if (seen.insert(idx).second) init.push_back(idx);
    }
    RealMatrix centroids(k, d);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < d; ++j) centroids(c, j) = features(init[c], j);

    auto dist_sq = [&](std::size_t point, std::size_t centroid) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = features(point, j) - centroids(centroid, j);
            s += diff * diff;
        }
        return s;
    };

    Partition assign(n, 0);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = dist_sq(i, 0);
            for (std::size_t c = 1; c < k; ++c) {
                const double dc = dist_sq(i, c);
                if (dc < best_d) {  // strict: ties keep the lowest index
                    best_d = dc;
                    best = c;
                }
            }
            if (assign[i] != static_cast<int>(best)) {
                assign[i] = static_cast<int>(best);
                changed = true;
            }
        }
        if (iter > 0 && !changed) break;

        std::vector<std::size_t> counts(k, 0);
        RealMatrix sums(k, d);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = static_cast<std::size_t>(assign[i]);
            ++counts[c];
            for (std::size_t j = 0; j < d; ++j) sums(c, j) += features(i, j);
        }
        std::vector<bool> reseeded(n, false);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (std::size_t j = 0; j < d; ++j)
                    centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
            } else {
                // reseed to the point farthest from its assigned centroid
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (reseeded[i]) continue;
                    const double dd = dist_sq(i, static_cast<std::size_t>(assign[i]));
                    if (dd > far_d) {
                        far_d = dd;
                        far = i;
                    }
                }
                reseeded[far] = true;
                for (std::size_t j = 0; j < d; ++j) centroids(c, j) = features(far, j);
            }
        }
    }
    return assign;
}

double feature_ari(const RealMatrix& features, const Partition& truth_labels,
                   std::uint64_t seed) {
    if (features.rows() != truth_labels.size())
        throw LengthMismatch("feature_ari: feature rows != label count");
    std::set<int> distinct(truth_labels.begin(), truth_labels.end());
    const Partition pred = kmeans(features, distinct.size(), seed);
    return adjusted_rand_index(pred, truth_labels);
}

ConfusionMatrix confusion(const Partition& pred, const Partition& truth, std::size_t k) {
    if (pred.size() != truth.size())
        throw LengthMismatch("confusion: partition lengths differ");
    ConfusionMatrix cm;
    cm.k = k;
    cm.counts.assign(k * k, 0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] < 0 || pred[i] < 0 || static_cast<std::size_t>(truth[i]) >= k ||
            static_cast<std::size_t>(pred[i]) >= k)
            throw BadLabel("confusion: label outside [0, " + std::to_string(k) + ")");
        ++cm.counts[static_cast<std::size_t>(truth[i]) * k +
                    static_cast<std::size_t>(pred[i])];
    }
    return cm;
}

}  // namespace dwl

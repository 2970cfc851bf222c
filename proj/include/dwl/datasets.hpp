#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dwl/matrix.hpp"
#include "dwl/rng.hpp"

namespace dwl {

// Samples live in the columns of x (D x N). Classification tasks fill
// `labels`; regression tasks fill `targets` (out_dim x N). image_shape is
// set when columns are flattened (channel, height, width) images.
struct Dataset {
    RealMatrix x;
    std::vector<int> labels;
    RealMatrix targets;
    std::vector<std::string> feature_names;
    std::vector<std::string> label_names;  // factorization map, index = label
    std::optional<std::array<std::size_t, 3>> image_shape;

    std::size_t n() const { return x.cols(); }
    std::size_t dim() const { return x.rows(); }
};

struct SplitSpec {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
    std::uint64_t seed = 0;
};

struct SplitResult {
    Dataset train, val, test;
};

// k Gaussian clusters at seeded random centers (uniform in [-10, 10] per
// informative coordinate, min pairwise center distance >= 4*spread enforced
// by rejection) plus pure-noise distractor dimensions appended after the
// informative ones.
Dataset make_blobs(SeededRng& rng, std::size_t k, std::size_t dim, std::size_t n_per_class,
                   double spread, std::size_t distractor_dims, double distractor_std);

struct LowrankResult {
    Dataset data;
    RealMatrix true_basis;  // d x rank, orthonormal
};

// x = B*C + noise with B a seeded random orthonormal basis and C standard
// Gaussian. Labels are all zero (unsupervised testbed).
LowrankResult make_lowrank(SeededRng& rng, std::size_t d, std::size_t n, std::size_t rank,
                           double noise_std);

// Two-class bar images: horizontal bar vs vertical bar at seeded positions,
// uniform noise in [-0.1, 0.1] on every pixel. image_shape = (1, size, size).
Dataset make_bars(SeededRng& rng, std::size_t size, std::size_t n_per_class);

// Seeded uniform permutation, then the first floor(train*N) columns,
// the next floor(val*N), and the remainder.
SplitResult split(const Dataset& dataset, const SplitSpec& spec);

// Rectangular numeric CSV with a header row; the label column is factorized
// in first-appearance order. Features transpose to D x N.
Dataset load_csv(const std::string& path, const std::string& label_column);

// Inverse of load_csv for tabular datasets (17 significant digits).
void save_csv(const Dataset& dataset, const std::string& path,
              const std::string& label_column = "label");

struct StandardizeStats {
    std::vector<double> mean;  // per feature
    std::vector<double> std;   // per feature, floored
};

StandardizeStats standardize_fit(const Dataset& train);
Dataset standardize_apply(const StandardizeStats& stats, const Dataset& dataset);

}  // namespace dwl

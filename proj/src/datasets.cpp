#include "dwl/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dwl/errors.hpp"
#include "dwl/linalg.hpp"
#include "dwl/tolerances.hpp"

namespace dwl {

Dataset make_blobs(SeededRng& rng, std::size_t k, std::size_t dim, std::size_t n_per_class,
                   double spread, std::size_t distractor_dims, double distractor_std) {
    if (k < 2 || dim < 1 || n_per_class < 1)
        throw BadConfig("make_blobs: need k >= 2, dim >= 1, n_per_class >= 1");
    if (spread < 0.0 || distractor_std < 0.0)
        throw BadConfig("make_blobs: negative spread or distractor_std");

    // seeded centers with a minimum pairwise separation
    RealMatrix centers(k, dim);
    const double min_dist = 4.0 * spread;
    std::size_t rejections = 0;
    for (std::size_t c = 0; c < k;) {
        std::vector<double> cand(dim);
        for (double& v : cand) v = rng.uniform(-10.0, 10.0);
        bool ok = true;
        for (std::size_t p = 0; p < c && ok; ++p) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double diff = cand[j] - centers(p, j);
                d2 += diff * diff;
            }
            ok = std::sqrt(d2) >= min_dist;
        }
        if (ok) {
            for (std::size_t j = 0; j < dim; ++j) centers(c, j) = cand[j];
            ++c;
        } else if (++rejections >= 10000) {
            throw CenterPlacementFailure("make_blobs: could not place " + std::to_string(k) +
                                         " centers with separation " +
                                         std::to_string(min_dist));
        }
    }

    const std::size_t total_dim = dim + distractor_dims;
    const std::size_t n = k * n_per_class;
    Dataset ds;
    ds.x = RealMatrix(total_dim, n);
    ds.labels.resize(n);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t s = 0; s < n_per_class; ++s) {
            const std::size_t col = c * n_per_class + s;
            ds.labels[col] = static_cast<int>(c);
            for (std::size_t j = 0; j < dim; ++j)
                ds.x(j, col) = centers(c, j) + spread * rng.normal();
            for (std::size_t j = dim; j < total_dim; ++j)
                ds.x(j, col) = distractor_std * rng.normal();
        }
    return ds;
}

LowrankResult make_lowrank(SeededRng& rng, std::size_t d, std::size_t n, std::size_t rank,
                           double noise_std) {
    if (rank == 0 || rank > std::min(d, n))
        throw BadConfig("make_lowrank: rank outside [1, min(d, n)]");
    if (noise_std < 0.0) throw BadConfig("make_lowrank: negative noise_std");

    LowrankResult res;
    res.true_basis = thin_qr(gaussian_matrix(rng, d, rank, 0.0, 1.0)).q;
    RealMatrix coeff = gaussian_matrix(rng, rank, n, 0.0, 1.0);
    res.data.x = matmul(res.true_basis, coeff);
    if (noise_std > 0.0)
        res.data.x = add_scaled(res.data.x, 1.0, gaussian_matrix(rng, d, n, 0.0, noise_std));
    res.data.labels.assign(n, 0);
    return res;
}

Dataset make_bars(SeededRng& rng, std::size_t size, std::size_t n_per_class) {
    if (size < 4) throw BadConfig("make_bars: size must be >= 4");
    if (n_per_class < 1) throw BadConfig("make_bars: n_per_class must be >= 1");

    const std::size_t d = size * size;
    const std::size_t n = 2 * n_per_class;
    Dataset ds;
    ds.x = RealMatrix(d, n);
    ds.labels.resize(n);
    ds.image_shape = {std::size_t{1}, size, size};
    for (std::size_t cls = 0; cls < 2; ++cls)
        for (std::size_t s = 0; s < n_per_class; ++s) {
            const std::size_t col = cls * n_per_class + s;
            ds.labels[col] = static_cast<int>(cls);
            const std::size_t pos = rng.uniform_u64(size);
            for (std::size_t y = 0; y < size; ++y)
                for (std::size_t x = 0; x < size; ++x) {
                    const bool on = (cls == 0) ? (y == pos) : (x == pos);
                    ds.x(y * size + x, col) = (on ? 1.0 : 0.0) + rng.uniform(-0.1, 0.1);
                }
        }
    return ds;
}

namespace {

Dataset take_columns(const Dataset& src, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.x = select_columns(src.x, idx);
    if (!src.labels.empty()) {
        out.labels.resize(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) out.labels[i] = src.labels[idx[i]];
    }
    if (src.targets.cols() > 0) out.targets = select_columns(src.targets, idx);
    out.feature_names = src.feature_names;
    out.label_names = src.label_names;
    out.image_shape = src.image_shape;
    return out;
}

}  // namespace

SplitResult split(const Dataset& dataset, const SplitSpec& spec) {
    if (!(spec.train > 0.0) || !(spec.val > 0.0) || !(spec.test > 0.0) ||
        std::fabs(spec.train + spec.val + spec.test - 1.0) > 1e-9)
        throw BadConfig("split: fractions must be positive and sum to 1");
    const std::size_t n = dataset.n();
    const std::size_t n_train = static_cast<std::size_t>(std::floor(spec.train * n));
    const std::size_t n_val = static_cast<std::size_t>(std::floor(spec.val * n));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= n)
        throw TooSmall("split: " + std::to_string(n) + " samples leave an empty split");

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    SeededRng rng(spec.seed);
    for (std::size_t i = n; i-- > 1;)
        std::swap(perm[i], perm[rng.uniform_u64(i + 1)]);

    SplitResult res;
    res.train = take_columns(dataset, {perm.begin(), perm.begin() + n_train});
    res.val = take_columns(dataset, {perm.begin() + n_train, perm.begin() + n_train + n_val});
    res.test = take_columns(dataset, {perm.begin() + n_train + n_val, perm.end()});
    return res;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_number(const std::string& token, std::size_t line_no, std::size_t col_no) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw ParseError("csv: not a finite number at line " + std::to_string(line_no) +
                         ", column " + std::to_string(col_no));
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw EmptyFile("csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw EmptyFile("csv: empty file " + path);

    const std::vector<std::string> header = split_line(line);
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_idx = i;
    if (label_idx == header.size())
        throw ParseError("csv: label column '" + label_column + "' not in header");

    Dataset ds;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (i != label_idx) ds.feature_names.push_back(header[i]);

    std::vector<std::vector<double>> rows;  // one entry per sample
    std::map<std::string, int> label_map;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != header.size())
            throw RaggedRow("csv: line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(header.size() - 1);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == label_idx) {
                auto [it, inserted] =
                    label_map.try_emplace(fields[i], static_cast<int>(ds.label_names.size()));
                if (inserted) ds.label_names.push_back(fields[i]);
                ds.labels.push_back(it->second);
            } else {
                row.push_back(parse_number(fields[i], line_no, i + 1));
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw EmptyFile("csv: no data rows in " + path);

    ds.x = RealMatrix(header.size() - 1, rows.size());
    for (std::size_t s = 0; s < rows.size(); ++s)
        for (std::size_t f = 0; f < rows[s].size(); ++f) ds.x(f, s) = rows[s][f];
    return ds;
}

void save_csv(const Dataset& dataset, const std::string& path,
              const std::string& label_column) {
    std::ofstream out(path);
    if (!out) throw IoError("csv: cannot write " + path);
    for (std::size_t f = 0; f < dataset.dim(); ++f) {
        if (f < dataset.feature_names.size())
            out << dataset.feature_names[f];
        else
            out << "f" << f;
        out << ',';
    }
    out << label_column << '\n';

    char buf[64];
    for (std::size_t s = 0; s < dataset.n(); ++s) {
        for (std::size_t f = 0; f < dataset.dim(); ++f) {
            std::snprintf(buf, sizeof buf, "%.17g", dataset.x(f, s));
            out << buf << ',';
        }
        const int lbl = dataset.labels.empty() ? 0 : dataset.labels[s];
        if (static_cast<std::size_t>(lbl) < dataset.label_names.size())
            out << dataset.label_names[lbl];
        else
            out << lbl;
        out << '\n';
    }
}

StandardizeStats standardize_fit(const Dataset& train) {
    const std::size_t d = train.dim(), n = train.n();
    if (n == 0) throw DimMismatch("standardize_fit: empty dataset");
    StandardizeStats st;
    st.mean.resize(d);
    st.std.resize(d);
    for (std::size_t f = 0; f < d; ++f) {
        double m = 0.0;
        for (std::size_t s = 0; s < n; ++s) m += train.x(f, s);
        m /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            const double diff = train.x(f, s) - m;
            var += diff * diff;
        }
        var /= static_cast<double>(n);
        st.mean[f] = m;
        st.std[f] = std::max(std::sqrt(var), tol::kStdFloor);
    }
    return st;
}

Dataset standardize_apply(const StandardizeStats& stats, const Dataset& dataset) {
    if (stats.mean.size() != dataset.dim())
        throw DimMismatch("standardize_apply: stats fitted on a different dimension");
    Dataset out = dataset;
    for (std::size_t f = 0; f < dataset.dim(); ++f)
        for (std::size_t s = 0; s < dataset.n(); ++s)
            out.x(f, s) = (dataset.x(f, s) - stats.mean[f]) / stats.std[f];
    return out;
}

}  // namespace dwl

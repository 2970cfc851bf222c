#pragma once

#include <cstddef>
#include <vector>

#include "dwl/errors.hpp"

namespace dwl {

// Dense row-major matrix of 64-bit reals. The universal carrier for data
// (D x N, samples as columns), projections, latents and features.
class RealMatrix {
public:
    RealMatrix() = default;
    RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static RealMatrix identity(std::size_t n) {
        RealMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const RealMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    friend bool operator==(const RealMatrix& a, const RealMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// c = a * b
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);
// c = a^T * b
RealMatrix matmul_tn(const RealMatrix& a, const RealMatrix& b);
// c = a * b^T
RealMatrix matmul_nt(const RealMatrix& a, const RealMatrix& b);

RealMatrix transpose(const RealMatrix& a);

// a + s*b, shapes must match
RealMatrix add_scaled(const RealMatrix& a, double s, const RealMatrix& b);
RealMatrix scaled(const RealMatrix& a, double s);

double frobenius_norm(const RealMatrix& a);
double max_abs(const RealMatrix& a);
double max_abs_diff(const RealMatrix& a, const RealMatrix& b);
double trace(const RealMatrix& a);

std::vector<double> column(const RealMatrix& a, std::size_t j);
std::vector<double> row(const RealMatrix& a, std::size_t i);
void set_column(RealMatrix& a, std::size_t j, const std::vector<double>& v);

// Columns of `a` selected by `idx`, in the given order.
RealMatrix select_columns(const RealMatrix& a, const std::vector<std::size_t>& idx);

bool has_nonfinite(const RealMatrix& a);

// max |a - a^T| <= tol * max(1, max|a|)
bool is_symmetric(const RealMatrix& a, double rel_tol);

}  // namespace dwl

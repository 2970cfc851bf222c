#include "dwl/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dwl {

namespace {
void require(bool ok, const char* what) {
    if (!ok) throw DimMismatch(what);
}
}  // namespace

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
    require(a.cols() == b.rows(), "matmul: inner dimensions differ");
    RealMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

RealMatrix matmul_tn(const RealMatrix& a, const RealMatrix& b) {
    require(a.rows() == b.rows(), "matmul_tn: row counts differ");
    RealMatrix c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = a(k, i);
            if (aki == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aki * b(k, j);
        }
    }
    return c;
}

RealMatrix matmul_nt(const RealMatrix& a, const RealMatrix& b) {
    require(a.cols() == b.cols(), "matmul_nt: column counts differ");
    RealMatrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
            c(i, j) = s;
        }
    }
    return c;
}

RealMatrix transpose(const RealMatrix& a) {
    RealMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

RealMatrix add_scaled(const RealMatrix& a, double s, const RealMatrix& b) {
    require(a.same_shape(b), "add_scaled: shapes differ");
    RealMatrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.values()[i] += s * b.values()[i];
    return c;
}

RealMatrix scaled(const RealMatrix& a, double s) {
    RealMatrix c = a;
    for (double& v : c.values()) v *= s;
    return c;
}

double frobenius_norm(const RealMatrix& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return std::sqrt(s);
}

double max_abs(const RealMatrix& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(const RealMatrix& a, const RealMatrix& b) {
    if (!a.same_shape(b)) throw DimMismatch("max_abs_diff: shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a.values()[i] - b.values()[i]));
    return m;
}

double trace(const RealMatrix& a) {
    double s = 0.0;
    const std::size_t n = std::min(a.rows(), a.cols());
    for (std::size_t i = 0; i < n; ++i) s += a(i, i);
    return s;
}

std::vector<double> column(const RealMatrix& a, std::size_t j) {
    std::vector<double> v(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) v[i] = a(i, j);
    return v;
}

std::vector<double> row(const RealMatrix& a, std::size_t i) {
    std::vector<double> v(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) v[j] = a(i, j);
    return v;
}

void set_column(RealMatrix& a, std::size_t j, const std::vector<double>& v) {
    require(v.size() == a.rows(), "set_column: length differs from row count");
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) = v[i];
}

RealMatrix select_columns(const RealMatrix& a, const std::vector<std::size_t>& idx) {
    RealMatrix c(a.rows(), idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        require(idx[j] < a.cols(), "select_columns: index out of range");
        for (std::size_t i = 0; i < a.rows(); ++i) c(i, j) = a(i, idx[j]);
    }
    return c;
}

bool has_nonfinite(const RealMatrix& a) {
    for (double v : a.values())
        if (!std::isfinite(v)) return true;
    return false;
}

bool is_symmetric(const RealMatrix& a, double rel_tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, max_abs(a));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::fabs(a(i, j) - a(j, i)) > rel_tol * scale) return false;
    return true;
}

}  // namespace dwl

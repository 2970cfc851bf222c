#include "dwl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dwl/tolerances.hpp"

namespace dwl {

namespace {

void require_square_symmetric(const RealMatrix& a, const char* who) {
    if (a.rows() != a.cols()) throw BadShape(std::string(who) + ": matrix not square");
    if (!is_symmetric(a, tol::kSymmetryCheck))
        throw BadShape(std::string(who) + ": matrix not symmetric");
}

}  // namespace

SpdFactor cholesky_factor(const RealMatrix& a) {
    require_square_symmetric(a, "cholesky_factor");
    const std::size_t n = a.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));

    RealMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > tol::kSpdPivotRel * max_diag))
            throw NotSpd("cholesky_factor: pivot " + std::to_string(d) + " at index " +
                         std::to_string(j));
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return SpdFactor{std::move(l)};
}

RealMatrix spd_solve(const SpdFactor& f, const RealMatrix& b) {
    const std::size_t n = f.dim();
    if (b.rows() != n) throw DimMismatch("spd_solve: rhs row count differs from factor dim");
    const RealMatrix& l = f.lower;
    RealMatrix x = b;
    // forward: L y = b
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
            x(i, c) = s / l(i, i);
        }
        // backward: L^T x = y
        for (std::size_t ii = n; ii-- > 0;) {
            double s = x(ii, c);
            for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x(k, c);
            x(ii, c) = s / l(ii, ii);
        }
    }
    return x;
}

RealMatrix spd_inverse(const SpdFactor& f) {
    RealMatrix inv = spd_solve(f, RealMatrix::identity(f.dim()));
    // symmetrize to remove the roundoff skew of columnwise solves
    for (std::size_t i = 0; i < inv.rows(); ++i)
        for (std::size_t j = i + 1; j < inv.cols(); ++j) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = v;
            inv(j, i) = v;
        }
    return inv;
}

QrResult thin_qr(const RealMatrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (m < n) throw BadShape("thin_qr: need rows >= cols");
    if (n == 0) throw BadShape("thin_qr: empty matrix");

    RealMatrix work = a;                       // becomes R in the upper triangle
    std::vector<std::vector<double>> vs(n);    // unit Householder vectors

    for (std::size_t k = 0; k < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < m; ++i) norm += work(i, k) * work(i, k);
        norm = std::sqrt(norm);
        std::vector<double> v(m - k, 0.0);
        if (norm > 0.0) {
            const double alpha = work(k, k) >= 0.0 ? -norm : norm;
            for (std::size_t i = k; i < m; ++i) v[i - k] = work(i, k);
            v[0] -= alpha;
            double vnorm = 0.0;
            for (double t : v) vnorm += t * t;
            vnorm = std::sqrt(vnorm);
            if (vnorm > 0.0) {
                for (double& t : v) t /= vnorm;
                // apply H = I - 2 v v^T to the trailing block
                for (std::size_t j = k; j < n; ++j) {
                    double dot = 0.0;
                    for (std::size_t i = k; i < m; ++i) dot += v[i - k] * work(i, j);
                    for (std::size_t i = k; i < m; ++i) work(i, j) -= 2.0 * dot * v[i - k];
                }
            }
        }
        vs[k] = std::move(v);
    }

    RealMatrix r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) r(i, j) = work(i, j);

    // rank test on the orthogonalized column norms |r_jj|
    double dmax = 0.0, dmin = 0.0;
    for (std::size_t j = 0; j < n; ++j) dmax = std::max(dmax, std::fabs(r(j, j)));
    dmin = dmax;
    for (std::size_t j = 0; j < n; ++j) dmin = std::min(dmin, std::fabs(r(j, j)));
    if (!(dmin > tol::kQrRankRel * dmax))
        throw RankDeficient("thin_qr: rank-deficient input (min |r_jj| = " +
                            std::to_string(dmin) + ")");

    // q = H_0 H_1 ... H_{n-1} * I(:, 0..n-1)
    RealMatrix q(m, n);
    for (std::size_t j = 0; j < n; ++j) q(j, j) = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        const std::vector<double>& v = vs[k];
        if (v.empty()) continue;
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < m; ++i) dot += v[i - k] * q(i, j);
            if (dot == 0.0) continue;
            for (std::size_t i = k; i < m; ++i) q(i, j) -= 2.0 * dot * v[i - k];
        }
    }

    // sign convention: diag(r) >= 0
    for (std::size_t j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) {
            for (std::size_t c = j; c < n; ++c) r(j, c) = -r(j, c);
            for (std::size_t i = 0; i < m; ++i) q(i, j) = -q(i, j);
        }
    }
    return QrResult{std::move(q), std::move(r)};
}

EigResult sym_eig(const RealMatrix& a) {
    require_square_symmetric(a, "sym_eig");
    const std::size_t n = a.rows();
    EigResult out;
    out.values.assign(n, 0.0);
    out.vectors = RealMatrix::identity(n);
    if (n == 0) return out;
    if (n == 1) {
        out.values[0] = a(0, 0);
        return out;
    }

    // Householder tridiagonalization, accumulating the transform in z.
    RealMatrix z = RealMatrix::identity(n);
    std::vector<double> d(n), e(n, 0.0);
    RealMatrix t = a;
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) norm += t(i, k) * t(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        const double alpha = t(k + 1, k) >= 0.0 ? -norm : norm;
        std::vector<double> v(n, 0.0);
        for (std::size_t i = k + 1; i < n; ++i) v[i] = t(i, k);
        v[k + 1] -= alpha;
        double vnorm = 0.0;
        for (double x : v) vnorm += x * x;
        vnorm = std::sqrt(vnorm);
        if (vnorm == 0.0) continue;
        for (double& x : v) x /= vnorm;

        // t <- H t H with H = I - 2 v v^T
        std::vector<double> w(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += t(i, j) * v[j];
            w[i] = s;
        }
        double vw = 0.0;
        for (std::size_t i = 0; i < n; ++i) vw += v[i] * w[i];
        for (std::size_t i = 0; i < n; ++i) w[i] -= vw * v[i];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                t(i, j) -= 2.0 * (v[i] * w[j] + w[i] * v[j]);

        // z <- z H
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += z(i, j) * v[j];
            for (std::size_t j = 0; j < n; ++j) z(i, j) -= 2.0 * s * v[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = t(i, i);
    for (std::size_t i = 0; i + 1 < n; ++i) e[i] = t(i + 1, i);

    // Implicit QL iteration with shifts on the tridiagonal (d, e).
    const std::size_t sweep_cap = 30 * n;
    std::size_t sweeps = 0;
    for (std::size_t l = 0; l < n; ++l) {
        for (;;) {
            std::size_t m = l;
            while (m + 1 < n) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= 2.3e-16 * dd) break;
                ++m;
            }
            if (m == l) break;
            if (++sweeps > sweep_cap)
                throw NoConvergence("sym_eig: QL iteration exceeded " +
                                    std::to_string(sweep_cap) + " sweeps");
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool underflow = false;
            for (std::size_t i = m; i-- > l;) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for (std::size_t k = 0; k < n; ++k) {
                    f = z(k, i + 1);
                    z(k, i + 1) = s * z(k, i) + c * f;
                    z(k, i) = c * z(k, i) - s * f;
                }
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    // sort eigenpairs ascending
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });
    out.vectors = RealMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = d[order[j]];
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = z(i, order[j]);
    }
    return out;
}

std::vector<double> principal_angles(const RealMatrix& u1, const RealMatrix& u2) {
    if (u1.rows() != u2.rows()) throw DimMismatch("principal_angles: row counts differ");
    auto check_orthonormal = [](const RealMatrix& u, const char* name) {
        const RealMatrix g = matmul_tn(u, u);
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) {
                const double want = (i == j) ? 1.0 : 0.0;
                if (std::fabs(g(i, j) - want) > tol::kOrthonormal)
                    throw NotOrthonormal(std::string("principal_angles: ") + name +
                                         " columns not orthonormal");
            }
    };
    check_orthonormal(u1, "u1");
    check_orthonormal(u2, "u2");

    const RealMatrix m = matmul_tn(u1, u2);
    // singular values of m via the smaller Gram matrix
    const RealMatrix g = (m.rows() <= m.cols()) ? matmul_nt(m, m) : matmul_tn(m, m);
    const EigResult eig = sym_eig(g);
    const std::size_t k = g.rows();
    std::vector<double> angles(k);
    for (std::size_t i = 0; i < k; ++i) {
        // eigenvalues ascend, so singular values ascend and angles descend
        double sv = std::sqrt(std::max(0.0, eig.values[k - 1 - i]));
        sv = std::clamp(sv, 0.0, 1.0);
        angles[i] = std::acos(sv);
    }
    return angles;  // ascending
}

RealMatrix gaussian_matrix(SeededRng& rng, std::size_t rows, std::size_t cols,
                           double mean, double std_dev) {
    if (std_dev < 0.0) throw BadConfig("gaussian_matrix: negative std");
    RealMatrix m(rows, cols);
    for (double& v : m.values()) v = mean + std_dev * rng.normal();
    return m;
}

}  // namespace dwl

#pragma once

#include <vector>

#include "dwl/matrix.hpp"
#include "dwl/rng.hpp"

namespace dwl {

// Cholesky factor of a symmetric positive definite matrix: lower * lower^T
// reconstructs the input; the diagonal of lower is strictly positive.
struct SpdFactor {
    RealMatrix lower;
    std::size_t dim() const { return lower.rows(); }
};

// Factor a symmetric positive definite matrix. Throws NotSpd when a pivot
// falls at or below kSpdPivotRel times the largest diagonal entry.
SpdFactor cholesky_factor(const RealMatrix& a);

// Solve a*x = b for the matrix factored into f (b may have many columns).
RealMatrix spd_solve(const SpdFactor& f, const RealMatrix& b);

// Explicit symmetric inverse of the factored matrix.
RealMatrix spd_inverse(const SpdFactor& f);

struct QrResult {
    RealMatrix q;  // rows x cols, orthonormal columns
    RealMatrix r;  // cols x cols, upper triangular, diag(r) >= 0
};

// Thin QR by Householder reflections, rows >= cols. Column signs of q are
// flipped so that diag(r) >= 0, making the decomposition unique for
// full-column-rank input. Throws RankDeficient when the smallest |r_jj| is
// at or below kQrRankRel times the largest.
QrResult thin_qr(const RealMatrix& a);

struct EigResult {
    std::vector<double> values;  // ascending
    RealMatrix vectors;          // orthonormal columns, vectors.col(i) pairs with values[i]
};

// Symmetric eigendecomposition: Householder tridiagonalization followed by
// implicit QL iteration with shifts, capped at 30*n sweeps (NoConvergence
// beyond that). Input must be symmetric within kSymmetryCheck.
EigResult sym_eig(const RealMatrix& a);

// Principal angles (radians, ascending) between the column spans of two
// matrices with orthonormal columns. Angle count is min(u1.cols, u2.cols).
std::vector<double> principal_angles(const RealMatrix& u1, const RealMatrix& u2);

// rows x cols matrix of i.i.d. Gaussian samples, filled row-major.
RealMatrix gaussian_matrix(SeededRng& rng, std::size_t rows, std::size_t cols,
                           double mean, double std_dev);

}  // namespace dwl

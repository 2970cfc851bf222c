#pragma once

// Numerical tolerances shared by the library and its tests.

namespace dwl::tol {

inline constexpr double kSymmetryCheck = 1e-12;   // relative asymmetry allowed in "symmetric" inputs
inline constexpr double kSpdPivotRel   = 1e-14;   // Cholesky pivot cutoff, relative to max diagonal
inline constexpr double kFactorResidual = 1e-10;  // factor/QR reconstruction residual
inline constexpr double kInverseResidual = 1e-9;  // a * inv(a) - I residual
inline constexpr double kQrRankRel     = 1e-12;   // rank test on |diag(R)|, relative to largest
inline constexpr double kOrthonormal   = 1e-8;    // orthonormality required of subspace arguments
inline constexpr double kStdFloor      = 1e-8;    // floor applied to standard deviations in z-scoring

}  // namespace dwl::tol

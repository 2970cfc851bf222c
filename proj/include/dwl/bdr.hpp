#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dwl/linalg.hpp"
#include "dwl/matrix.hpp"

namespace dwl {

enum class PriorMode { ElementWise, Ard };

// Hyperparameters and controls for one variational fit.
//
// sigma_z_sq is the assumed latent-noise share of the data variance. The
// update map keeps a component alive only while its data eigenvalue exceeds
// the noise level implied by sigma_z_sq, so the default of 0.5 (half of a
// unit-variance signal) separates structure from sampling noise on
// standardized inputs; 1.0 or more collapses everything on unit-variance
// data.
struct BdrConfig {
    std::size_t r = 2;               // requested component count
    PriorMode prior_mode = PriorMode::Ard;
    double sigma_z_sq = 0.5;         // latent noise variance
    double alpha_phi = 1.0;          // gamma prior shape
    double beta_phi = 1.0;           // gamma prior scale
    std::size_t max_iter = 200;
    double tol = 1e-4;               // relative Frobenius change of q_mu
    std::uint64_t seed = 0;
    bool center_data = true;
    double prune_threshold = 1e4;    // dynamic-range cutoff used by ard_prune
};

// All variational posterior statistics for one coordinate-ascent run.
// phi_mean is D x R in element-wise mode and 1 x R in ARD mode.
struct BdrState {
    RealMatrix q_mu;                  // D x R projection posterior mean
    std::vector<RealMatrix> sigma_q;  // R covariance matrices, each D x D
    RealMatrix phi_mean;              // precision posterior means, all > 0
    RealMatrix z_mu;                  // R x N latent posterior mean
    RealMatrix sigma_z;               // R x R shared latent covariance
    std::size_t iteration = 0;
    double last_delta = 0.0;

    std::size_t dim() const { return q_mu.rows(); }
    std::size_t components() const { return q_mu.cols(); }
};

struct FitReport {
    std::size_t iterations_run = 0;
    bool converged = false;
    double final_delta = 0.0;
    std::vector<double> delta_history;  // one entry per iteration
    RealMatrix phi_final;
};

// Frozen fitted projector: orthonormal basis, centering vector and the
// indices of components kept after pruning.
struct BdrModel {
    RealMatrix q_orth;              // D x R_eff, orthonormal columns
    RealMatrix r_upper;             // R_eff x R_eff upper triangular
    std::vector<double> center;     // length D (zeros when centering off)
    std::vector<std::size_t> retained;
    BdrConfig config;
    FitReport fit_report;

    std::size_t dim() const { return q_orth.rows(); }
    std::size_t effective_components() const { return q_orth.cols(); }
};

// Seeded initial state: q_mu ~ Gaussian(0, 1/sqrt(D)), unit covariances,
// prior-mean precisions, then one latent update so z_mu/sigma_z are defined.
BdrState bdr_init(const RealMatrix& x, const BdrConfig& config);

// Single coordinate-ascent steps. Each mutates only its own block of the
// state and matches a direct transcription of its update formula.
void update_latents(BdrState& state, const RealMatrix& x, const BdrConfig& config);
void update_precision_elementwise(BdrState& state, const BdrConfig& config);
void update_precision_ard(BdrState& state, const BdrConfig& config);
void update_projection(BdrState& state, const RealMatrix& x, const BdrConfig& config);

// Full fit: iterate latents -> precisions -> projection until the relative
// Frobenius change of q_mu drops below tol or max_iter is reached, then
// prune (ARD mode) and orthonormalize the retained columns.
std::pair<BdrModel, FitReport> bdr_fit(const RealMatrix& x, const BdrConfig& config);

// QR factorization of the projection mean with the fixed sign convention.
std::pair<RealMatrix, RealMatrix> orthonormalize(const RealMatrix& q_mu);

// Project any D x M data block onto the fitted basis: (x - center)^T q_orth.
RealMatrix bdr_project(const BdrModel& model, const RealMatrix& x_any);

// Select the components that carry the fitted projection. Columns of q_mu
// are ranked by modified Gram-Schmidt residual norm; a column survives while
// its residual stays within a factor `threshold` of the strongest column.
// Under the ARD posterior, column energy orders components exactly opposite
// to their precision means, so this keeps the low-precision (live)
// components and drops the collapsed ones, independent of data scale.
// At least one component is always retained. Indices return ascending.
std::vector<std::size_t> ard_prune(const BdrState& state, double threshold);

// Top-r eigenvectors of the centered sample covariance, descending
// eigenvalue order, each column's largest-magnitude entry made positive.
RealMatrix pca_baseline(const RealMatrix& x, std::size_t r);

}  // namespace dwl

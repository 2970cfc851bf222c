#include "dwl/bdr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "dwl/tolerances.hpp"

namespace dwl {

namespace {

void validate_config(const BdrConfig& cfg, std::size_t d, std::size_t n) {
    if (cfg.r == 0) throw BadConfig("bdr: component count must be >= 1");
    if (cfg.r > std::min(d, n))
        throw BadConfig("bdr: r = " + std::to_string(cfg.r) + " exceeds min(D, N) = " +
                        std::to_string(std::min(d, n)));
    if (!(cfg.sigma_z_sq > 0.0)) throw BadConfig("bdr: sigma_z_sq must be positive");
    if (!(cfg.alpha_phi > 0.0) || !(cfg.beta_phi > 0.0))
        throw BadConfig("bdr: alpha_phi and beta_phi must be positive");
    if (!(cfg.tol > 0.0)) throw BadConfig("bdr: tol must be positive");
    if (!(cfg.prune_threshold > 0.0)) throw BadConfig("bdr: prune_threshold must be positive");
}

void validate_data(const RealMatrix& x) {
    if (x.rows() == 0 || x.cols() < 2) throw BadShape("bdr: need D >= 1 and N >= 2");
    if (has_nonfinite(x)) throw BadShape("bdr: data contains non-finite values");
}

// Shared per-fit quantities: the data Gram matrix and, in ARD mode, its
// eigendecomposition (one factorization serves every component and
// iteration).
struct FitCache {
    RealMatrix gram;  // x x^T
    std::optional<EigResult> gram_eig;
};

FitCache make_cache(const RealMatrix& x, PriorMode mode) {
    FitCache cache;
    cache.gram = matmul_nt(x, x);
    if (mode == PriorMode::Ard) cache.gram_eig = sym_eig(cache.gram);
    return cache;
}

void projection_step(BdrState& state, const RealMatrix& x, const BdrConfig& cfg,
                     const FitCache& cache) {
    const std::size_t d = state.dim();
    const std::size_t r = state.components();
    const double sz = cfg.sigma_z_sq;

    const RealMatrix xz = matmul_nt(x, state.z_mu);  // D x R

    for (std::size_t s = 0; s < r; ++s) {
        if (cfg.prior_mode == PriorMode::ElementWise) {
            RealMatrix m = scaled(cache.gram, 1.0 / sz);
            for (std::size_t f = 0; f < d; ++f) m(f, f) += state.phi_mean(f, s);
            try {
                state.sigma_q[s] = spd_inverse(cholesky_factor(m));
            } catch (const NotSpd& err) {
                throw NumericalFailure(std::string("update_projection: ") + err.what());
            }
        } else {
            const EigResult& eig = *cache.gram_eig;
            const double phi = state.phi_mean(0, s);
            // (phi I + G/sz)^{-1} = V diag(sz / (lambda + phi sz)) V^T
            RealMatrix vw(d, d);
            for (std::size_t i = 0; i < d; ++i) {
                const double denom = eig.values[i] + phi * sz;
                if (!(denom > 0.0) || !std::isfinite(denom))
                    throw NumericalFailure("update_projection: degenerate ARD covariance");
                const double w = sz / denom;
                for (std::size_t f = 0; f < d; ++f) vw(f, i) = eig.vectors(f, i) * w;
            }
            state.sigma_q[s] = matmul_nt(vw, eig.vectors);
        }
        // q_s = Sigma_{q_s} X z^s / sigma_z^2
        for (std::size_t f = 0; f < d; ++f) {
            double acc = 0.0;
            for (std::size_t g = 0; g < d; ++g) acc += state.sigma_q[s](f, g) * xz(g, s);
            state.q_mu(f, s) = acc / sz;
        }
    }
    if (has_nonfinite(state.q_mu))
        throw NumericalFailure("update_projection: non-finite projection mean");
}

std::vector<double> column_means(const RealMatrix& x) {
    std::vector<double> mu(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) s += x(i, j);
        mu[i] = s / static_cast<double>(x.cols());
    }
    return mu;
}

RealMatrix subtract_center(const RealMatrix& x, const std::vector<double>& mu) {
    RealMatrix c = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) c(i, j) -= mu[i];
    return c;
}

}  // namespace

BdrState bdr_init(const RealMatrix& x, const BdrConfig& config) {
    validate_data(x);
    validate_config(config, x.rows(), x.cols());
    const std::size_t d = x.rows();
    const std::size_t r = config.r;

    BdrState state;
    SeededRng rng(config.seed);
    state.q_mu = gaussian_matrix(rng, d, r, 0.0, 1.0 / std::sqrt(static_cast<double>(d)));
    state.sigma_q.assign(r, RealMatrix::identity(d));
    if (config.prior_mode == PriorMode::ElementWise)
        state.phi_mean = RealMatrix(d, r, config.alpha_phi * config.beta_phi);
    else
        state.phi_mean = RealMatrix(1, r, config.alpha_phi * config.beta_phi);
    state.sigma_z = RealMatrix::identity(r);
    state.z_mu = RealMatrix(r, x.cols());
    update_latents(state, x, config);
    return state;
}

void update_latents(BdrState& state, const RealMatrix& x, const BdrConfig& config) {
    if (state.dim() != x.rows() || state.z_mu.cols() != x.cols())
        throw BadShape("update_latents: state/data shapes inconsistent");
    const double sz = config.sigma_z_sq;
    RealMatrix m = scaled(matmul_tn(state.q_mu, state.q_mu), 1.0 / sz);
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
    try {
        state.sigma_z = spd_inverse(cholesky_factor(m));
    } catch (const NotSpd& err) {
        throw NumericalFailure(std::string("update_latents: ") + err.what());
    }
    state.z_mu = scaled(matmul(state.sigma_z, matmul_tn(state.q_mu, x)), 1.0 / sz);
}

void update_precision_elementwise(BdrState& state, const BdrConfig& config) {
    if (config.prior_mode != PriorMode::ElementWise)
        throw BadConfig("update_precision_elementwise: config not in element-wise mode");
    const double shape = config.alpha_phi + 0.5;
    for (std::size_t s = 0; s < state.components(); ++s)
        for (std::size_t f = 0; f < state.dim(); ++f) {
            const double q = state.q_mu(f, s);
            const double rate = 1.0 / config.beta_phi + 0.5 * q * q +
                                0.5 * state.sigma_q[s](f, f);
            state.phi_mean(f, s) = shape / rate;
        }
}

void update_precision_ard(BdrState& state, const BdrConfig& config) {
    if (config.prior_mode != PriorMode::Ard)
        throw BadConfig("update_precision_ard: config not in ARD mode");
    const double shape = config.alpha_phi + 0.5 * static_cast<double>(state.dim());
    for (std::size_t s = 0; s < state.components(); ++s) {
        double qsq = 0.0;
        for (std::size_t f = 0; f < state.dim(); ++f) qsq += state.q_mu(f, s) * state.q_mu(f, s);
        const double rate = 1.0 / config.beta_phi + 0.5 * (qsq + trace(state.sigma_q[s]));
        state.phi_mean(0, s) = shape / rate;
    }
}

void update_projection(BdrState& state, const RealMatrix& x, const BdrConfig& config) {
    if (state.dim() != x.rows())
        throw BadShape("update_projection: state/data shapes inconsistent");
    projection_step(state, x, config, make_cache(x, config.prior_mode));
}

std::pair<RealMatrix, RealMatrix> orthonormalize(const RealMatrix& q_mu) {
    QrResult qr = thin_qr(q_mu);
    return {std::move(qr.q), std::move(qr.r)};
}

std::vector<std::size_t> ard_prune(const BdrState& state, double threshold) {
    if (!(threshold > 0.0)) throw BadConfig("ard_prune: threshold must be positive");
    const std::size_t d = state.dim();
    const std::size_t r = state.components();

    std::vector<std::vector<double>> residual(r);
    std::vector<double> norms(r, 0.0);
    for (std::size_t s = 0; s < r; ++s) {
        residual[s] = column(state.q_mu, s);
        double nsq = 0.0;
        for (double v : residual[s]) nsq += v * v;
        norms[s] = std::sqrt(nsq);
    }
    const double cutoff = *std::max_element(norms.begin(), norms.end()) / threshold;

    std::vector<std::size_t> retained;
    std::vector<bool> used(r, false);
    for (std::size_t pick = 0; pick < r; ++pick) {
        std::size_t best = r;
        double best_norm = -1.0;
        for (std::size_t s = 0; s < r; ++s) {
            if (used[s]) continue;
            if (norms[s] > best_norm) {
                best_norm = norms[s];
                best = s;
            }
        }
        if (best == r) break;
        if (!retained.empty() && best_norm < cutoff) break;
        retained.push_back(best);
        used[best] = true;

        if (best_norm > 0.0) {
            // orthogonalize the remaining residuals against the pick
            std::vector<double> u = residual[best];
            for (double& v : u) v /= best_norm;
            for (std::size_t s = 0; s < r; ++s) {
                if (used[s]) continue;
                double dot = 0.0;
                for (std::size_t f = 0; f < d; ++f) dot += u[f] * residual[s][f];
                double nsq = 0.0;
                for (std::size_t f = 0; f < d; ++f) {
                    residual[s][f] -= dot * u[f];
                    nsq += residual[s][f] * residual[s][f];
                }
                norms[s] = std::sqrt(nsq);
            }
        }
    }
    std::sort(retained.begin(), retained.end());
    return retained;
}

std::pair<BdrModel, FitReport> bdr_fit(const RealMatrix& x, const BdrConfig& config) {
    validate_data(x);
    validate_config(config, x.rows(), x.cols());

    std::vector<double> center(x.rows(), 0.0);
    RealMatrix xc = x;
    if (config.center_data) {
        center = column_means(x);
        xc = subtract_center(x, center);
    }

    const FitCache cache = make_cache(xc, config.prior_mode);
    BdrState state = bdr_init(xc, config);

    FitReport report;
    for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
        update_latents(state, xc, config);
        if (config.prior_mode == PriorMode::ElementWise)
            update_precision_elementwise(state, config);
        else
            update_precision_ard(state, config);

        const RealMatrix q_old = state.q_mu;
        projection_step(state, xc, config, cache);

        const double denom = std::max(frobenius_norm(q_old), 1e-300);
        const double delta = frobenius_norm(add_scaled(state.q_mu, -1.0, q_old)) / denom;
        state.iteration = iter;
        state.last_delta = delta;
        report.delta_history.push_back(delta);
        if (delta < config.tol) {
            report.converged = true;
            break;
        }
    }
    report.iterations_run = report.delta_history.size();
    report.final_delta = state.last_delta;
    report.phi_final = state.phi_mean;

    std::vector<std::size_t> retained(config.r);
    std::iota(retained.begin(), retained.end(), 0);
    if (config.prior_mode == PriorMode::Ard)
        retained = ard_prune(state, config.prune_threshold);

    auto [q_orth, r_upper] = orthonormalize(select_columns(state.q_mu, retained));

    BdrModel model;
    model.q_orth = std::move(q_orth);
    model.r_upper = std::move(r_upper);
    model.center = std::move(center);
    model.retained = std::move(retained);
    model.config = config;
    model.fit_report = report;
    return {std::move(model), std::move(report)};
}

RealMatrix bdr_project(const BdrModel& model, const RealMatrix& x_any) {
    if (x_any.rows() != model.dim())
        throw DimMismatch("bdr_project: data rows " + std::to_string(x_any.rows()) +
                          " != model dim " + std::to_string(model.dim()));
    const RealMatrix xc = subtract_center(x_any, model.center);
    return matmul_tn(xc, model.q_orth);  // M x R_eff
}

RealMatrix pca_baseline(const RealMatrix& x, std::size_t r) {
    if (x.rows() == 0 || x.cols() < 2) throw BadShape("pca_baseline: need D >= 1 and N >= 2");
    if (r == 0 || r > std::min(x.rows(), x.cols()))
        throw BadShape("pca_baseline: r out of range");

    const RealMatrix xc = subtract_center(x, column_means(x));
    const RealMatrix cov = scaled(matmul_nt(xc, xc), 1.0 / static_cast<double>(x.cols() - 1));
    const EigResult eig = sym_eig(cov);

    const std::size_t d = x.rows();
    RealMatrix basis(d, r);
    for (std::size_t j = 0; j < r; ++j) {
        const std::size_t src = d - 1 - j;  // descending eigenvalue order
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double mag = std::fabs(eig.vectors(i, src));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        const double sign = eig.vectors(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < d; ++i) basis(i, j) = sign * eig.vectors(i, src);
    }
    return basis;
}

}  // namespace dwl

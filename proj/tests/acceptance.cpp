// Acceptance suite: runs every gate criterion end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "dwl/bdr.hpp"
#include "dwl/bundle.hpp"
#include "dwl/datasets.hpp"
#include "dwl/dnet.hpp"
#include "dwl/linalg.hpp"
#include "dwl/matrix_io.hpp"
#include "dwl/metrics.hpp"

using namespace dwl;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail,
            double seconds) {
    std::printf("[%s] criterion %2d: %-28s %s (%.1fs)\n", ok ? "PASS" : "FAIL", number,
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void run_criterion(int number, const std::string& name,
                   const std::function<std::pair<bool, std::string>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
        auto [res, msg] = body();
        ok = res;
        detail = msg;
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(number, name, ok, detail, secs);
}

// ---------------------------------------------------------------- oracles

RealMatrix gj_inverse(RealMatrix a) {
    const std::size_t n = a.rows();
    RealMatrix inv = RealMatrix::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t i = c + 1; i < n; ++i)
            if (std::fabs(a(i, c)) > std::fabs(a(piv, c))) piv = i;
        if (piv != c)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(c, j), a(piv, j));
                std::swap(inv(c, j), inv(piv, j));
            }
        const double p = a(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            a(c, j) /= p;
            inv(c, j) /= p;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c) continue;
            const double f = a(i, c);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) -= f * a(c, j);
                inv(i, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

void oracle_latents(BdrState& st, const RealMatrix& x, const BdrConfig& cfg) {
    const std::size_t r = st.components();
    RealMatrix m(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) {
            double dot = 0.0;
            for (std::size_t f = 0; f < st.dim(); ++f) dot += st.q_mu(f, i) * st.q_mu(f, j);
            m(i, j) = dot / cfg.sigma_z_sq + (i == j ? 1.0 : 0.0);
        }
    st.sigma_z = gj_inverse(m);
    RealMatrix z(r, x.cols());
    for (std::size_t n = 0; n < x.cols(); ++n)
        for (std::size_t i = 0; i < r; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < r; ++j) {
                double qtx = 0.0;
                for (std::size_t f = 0; f < st.dim(); ++f) qtx += st.q_mu(f, j) * x(f, n);
                acc += st.sigma_z(i, j) * qtx;
            }
            z(i, n) = acc / cfg.sigma_z_sq;
        }
    st.z_mu = z;
}

void oracle_precision(BdrState& st, const BdrConfig& cfg) {
    if (cfg.prior_mode == PriorMode::ElementWise) {
        for (std::size_t s = 0; s < st.components(); ++s)
            for (std::size_t f = 0; f < st.dim(); ++f) {
                const double scale = 1.0 / (1.0 / cfg.beta_phi +
                                            st.q_mu(f, s) * st.q_mu(f, s) / 2.0 +
                                            st.sigma_q[s](f, f) / 2.0);
                st.phi_mean(f, s) = (cfg.alpha_phi + 0.5) * scale;
            }
        return;
    }
    const double d = static_cast<double>(st.dim());
    for (std::size_t s = 0; s < st.components(); ++s) {
        double qq = 0.0, tr = 0.0;
        for (std::size_t f = 0; f < st.dim(); ++f) {
            qq += st.q_mu(f, s) * st.q_mu(f, s);
            tr += st.sigma_q[s](f, f);
        }
        st.phi_mean(0, s) =
            (cfg.alpha_phi + d / 2.0) / (1.0 / cfg.beta_phi + (qq + tr) / 2.0);
    }
}

void oracle_projection(BdrState& st, const RealMatrix& x, const BdrConfig& cfg) {
    const std::size_t d = st.dim();
    const RealMatrix gram = matmul_nt(x, x);
    for (std::size_t s = 0; s < st.components(); ++s) {
        RealMatrix m(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                m(i, j) = gram(i, j) / cfg.sigma_z_sq;
                if (i == j)
                    m(i, j) += (cfg.prior_mode == PriorMode::ElementWise)
                                   ? st.phi_mean(i, s)
                                   : st.phi_mean(0, s);
            }
        st.sigma_q[s] = gj_inverse(m);
        for (std::size_t f = 0; f < d; ++f) {
            double acc = 0.0;
            for (std::size_t g = 0; g < d; ++g) {
                double xz = 0.0;
                for (std::size_t n = 0; n < x.cols(); ++n) xz += x(g, n) * st.z_mu(s, n);
                acc += st.sigma_q[s](f, g) * xz;
            }
            st.q_mu(f, s) = acc / cfg.sigma_z_sq;
        }
    }
}

double max_state_diff(const BdrState& a, const BdrState& b) {
    double m = max_abs_diff(a.q_mu, b.q_mu);
    m = std::max(m, max_abs_diff(a.phi_mean, b.phi_mean));
    m = std::max(m, max_abs_diff(a.z_mu, b.z_mu));
    m = std::max(m, max_abs_diff(a.sigma_z, b.sigma_z));
    for (std::size_t s = 0; s < a.sigma_q.size(); ++s)
        m = std::max(m, max_abs_diff(a.sigma_q[s], b.sigma_q[s]));
    return m;
}

double ari_pair_oracle(const Partition& a, const Partition& b) {
    const std::size_t n = a.size();
    double n11 = 0, n00 = 0, n10 = 0, n01 = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool ta = a[i] == a[j];
            const bool tb = b[i] == b[j];
            if (ta && tb)
                ++n11;
            else if (!ta && !tb)
                ++n00;
            else if (ta)
                ++n10;
            else
                ++n01;
        }
    return 2.0 * (n11 * n00 - n10 * n01) /
           ((n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00));
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ------------------------------------------------------- shared fixtures

// The desk-scale two-arm task: well-separated Gaussian classes plus heavy
// pure-noise distractor dimensions.
Dataset convergence_task(std::uint64_t seed) {
    SeededRng rng(seed);
    return make_blobs(rng, 3, 5, 200, 1.0, 20, 6.0);
}

struct ArmRun {
    TrainHistory history;
    double test_accuracy = 0.0;
    DNetModel model;
    Dataset test;  // standardized
};

ArmRun run_arm(const Dataset& raw, std::uint64_t seed, LdSourceSpec ld,
               std::size_t max_epochs = 80, std::size_t patience = 10) {
    SplitSpec sp;
    sp.seed = seed;
    SplitResult splits = split(raw, sp);
    StandardizeStats st = standardize_fit(splits.train);
    Dataset train = standardize_apply(st, splits.train);
    Dataset val = standardize_apply(st, splits.val);
    Dataset test = standardize_apply(st, splits.test);

    DNetConfig cfg;
    cfg.hd_layers = {LayerSpec::dense(raw.dim(), 16), LayerSpec::relu()};
    cfg.ld_source = ld;
    cfg.fusion_width = 16;
    cfg.head = {HeadSpec::Kind::Classification, 3};

    TrainConfig tcfg;  // batch 32, lr 0.002, Adam, shuffling: the fixed protocol
    tcfg.batch_size = 32;
    tcfg.lr = 0.002;
    tcfg.max_epochs = max_epochs;
    tcfg.patience = patience;
    tcfg.seed = seed;

    auto [model, history] = dnet_train(cfg, tcfg, train, val);
    ArmRun run;
    run.history = std::move(history);
    run.test_accuracy = accuracy(dnet_predict(model, test), test.labels);
    run.model = std::move(model);
    run.test = std::move(test);
    return run;
}

double epochs_to_level(const TrainHistory& h, double level) {
    for (std::size_t e = 0; e < h.epochs(); ++e)
        if (h.val_acc[e] >= level) return static_cast<double>(e + 1);
    return static_cast<double>(h.epochs() + 1);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<missing:" + path + ">";
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DWL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

// ------------------------------------------------------------- criteria

std::pair<bool, std::string> criterion_update_conformance() {
    SeededRng rng(71);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 2 + rng.uniform_u64(7);  // 2..8
        const std::size_t r = 1 + rng.uniform_u64(3);  // 1..3
        const std::size_t n =
            std::max<std::size_t>(r, 2 + rng.uniform_u64(9));  // up to 10, >= r
        BdrConfig cfg;
        cfg.r = std::min(r, std::min(d, n));
        cfg.prior_mode = (trial % 2 == 0) ? PriorMode::ElementWise : PriorMode::Ard;
        cfg.sigma_z_sq = 0.25 + 0.25 * static_cast<double>(rng.uniform_u64(4));
        cfg.alpha_phi = 0.5 + 0.5 * static_cast<double>(rng.uniform_u64(3));
        cfg.beta_phi = 0.5 + 0.5 * static_cast<double>(rng.uniform_u64(3));
        cfg.seed = 500 + static_cast<std::uint64_t>(trial);
        RealMatrix x = gaussian_matrix(rng, d, n, 0.0, 1.0);

        BdrState st = bdr_init(x, cfg);
        update_latents(st, x, cfg);
        if (cfg.prior_mode == PriorMode::ElementWise)
            update_precision_elementwise(st, cfg);
        else
            update_precision_ard(st, cfg);
        update_projection(st, x, cfg);

        BdrState impl = st, oracle = st;
        update_latents(impl, x, cfg);
        oracle_latents(oracle, x, cfg);
        worst = std::max(worst, max_state_diff(impl, oracle));

        impl = st;
        oracle = st;
        if (cfg.prior_mode == PriorMode::ElementWise)
            update_precision_elementwise(impl, cfg);
        else
            update_precision_ard(impl, cfg);
        oracle_precision(oracle, cfg);
        worst = std::max(worst, max_state_diff(impl, oracle));

        impl = st;
        oracle = st;
        update_projection(impl, x, cfg);
        oracle_projection(oracle, x, cfg);
        worst = std::max(worst, max_state_diff(impl, oracle));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max |impl - transcription| = %.2e (<= 1e-10)", worst);
    return {worst <= 1e-10, buf};
}

std::pair<bool, std::string> criterion_orthonormal_projection() {
    SeededRng rng(72);
    double worst_orth = 0.0;
    bool bound_ok = true;
    double equality_gap = 0.0;
    int checked = 0;
    for (int trial = 0; trial < 4; ++trial) {
        const std::size_t d = 6 + 2 * static_cast<std::size_t>(trial);
        const std::size_t n = 60;
        LowrankResult lr = make_lowrank(rng, d, n, std::min<std::size_t>(3, d), 0.3);
        for (PriorMode mode : {PriorMode::Ard, PriorMode::ElementWise}) {
            for (std::size_t r : {std::size_t{2}, d}) {
                BdrConfig cfg;
                cfg.r = r;
                cfg.prior_mode = mode;
                cfg.seed = 40 + static_cast<std::uint64_t>(trial);
                auto [model, report] = bdr_fit(lr.data.x, cfg);
                ++checked;
                RealMatrix g = matmul_tn(model.q_orth, model.q_orth);
                worst_orth = std::max(
                    worst_orth,
                    max_abs_diff(g, RealMatrix::identity(g.rows())));

                RealMatrix u = bdr_project(model, lr.data.x);
                RealMatrix xc = lr.data.x;
                for (std::size_t i = 0; i < xc.rows(); ++i)
                    for (std::size_t j = 0; j < xc.cols(); ++j)
                        xc(i, j) -= model.center[i];
                const double proj = trace(matmul_tn(u, u));
                const double full = trace(matmul_nt(xc, xc));
                if (proj > full * (1.0 + 1e-12)) bound_ok = false;
                if (mode == PriorMode::ElementWise && r == d &&
                    model.effective_components() == d)
                    equality_gap = std::max(equality_gap,
                                            std::fabs(proj - full) / full);
            }
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "%d fits: max |q'q - I| = %.2e, trace bound %s, R=D gap %.2e", checked,
                  worst_orth, bound_ok ? "held" : "violated", equality_gap);
    return {worst_orth <= 1e-10 && bound_ok && equality_gap <= 1e-8, buf};
}

std::pair<bool, std::string> criterion_subspace_recovery() {
    SeededRng rng(73);
    LowrankResult lr = make_lowrank(rng, 20, 200, 3, 0.01);
    double worst_angle = 0.0;
    bool converged = true;
    for (PriorMode mode : {PriorMode::Ard, PriorMode::ElementWise}) {
        BdrConfig cfg;  // alpha_phi = beta_phi = 1, max_iter = 200 defaults
        cfg.r = 3;
        cfg.prior_mode = mode;
        cfg.seed = 7;
        auto [model, report] = bdr_fit(lr.data.x, cfg);
        converged = converged && report.converged &&
                    report.iterations_run < cfg.max_iter;
        RealMatrix pca = pca_baseline(lr.data.x, 3);
        for (double a : principal_angles(model.q_orth, pca))
            worst_angle = std::max(worst_angle, a);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max principal angle %.4f rad (< 0.05), converged %s",
                  worst_angle, converged ? "yes" : "no");
    return {worst_angle < 0.05 && converged, buf};
}

std::pair<bool, std::string> criterion_ard_pruning() {
    int good = 0;
    std::size_t min_pruned = 6;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SeededRng rng(800 + seed);
        LowrankResult lr = make_lowrank(rng, 20, 200, 2, 0.01);
        BdrConfig cfg;  // default prune_threshold
        cfg.r = 6;
        cfg.prior_mode = PriorMode::Ard;
        cfg.seed = seed;
        auto [model, report] = bdr_fit(lr.data.x, cfg);
        const std::size_t pruned = cfg.r - model.retained.size();
        min_pruned = std::min(min_pruned, pruned);
        if (pruned < 3) continue;
        RealMatrix pca = pca_baseline(lr.data.x, 2);
        bool ok = model.effective_components() == 2;
        if (ok)
            for (double a : principal_angles(model.q_orth, pca)) ok = ok && a < 0.1;
        if (ok) ++good;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d/5 seeds pruned >= 3 with span < 0.1 rad", good);
    return {good >= 4, buf};
}

std::pair<bool, std::string> criterion_gradients() {
    SeededRng rng(74);
    double worst = 0.0;

    {  // dense stack against both losses
        std::vector<LayerSpec> specs = {LayerSpec::dense(6, 5), LayerSpec::relu(),
                                        LayerSpec::dense(5, 4)};
        SeededRng prng(1);
        ParamList params = kaiming_init_all(prng, specs);
        Tensor x({3, 6});
        for (double& v : x.data) v = rng.normal();
        Tensor target({3, 4});
        for (double& v : target.data) v = rng.normal();
        worst = std::max(worst, grad_check(specs, params, x, [&](const Tensor& out) {
                             return mse(out, target);
                         }));
        std::vector<int> labels = {0, 3, 1};
        worst = std::max(worst, grad_check(specs, params, x, [&](const Tensor& out) {
                             return softmax_ce(out, labels);
                         }));
    }
    for (Padding pad : {Padding::Same, Padding::Valid}) {  // conv block
        const std::size_t odim = (pad == Padding::Same) ? 3u : 2u;
        std::vector<LayerSpec> specs = {LayerSpec::conv2d(2, 3, pad), LayerSpec::relu(),
                                        LayerSpec::maxpool2(), LayerSpec::flatten(),
                                        LayerSpec::dense(3 * odim * odim, 2)};
        SeededRng prng(2);
        ParamList params = kaiming_init_all(prng, specs);
        Tensor x({2, 2, 6, 6});
        for (double& v : x.data) v = rng.normal();
        std::vector<int> labels = {1, 0};
        worst = std::max(worst, grad_check(specs, params, x, [&](const Tensor& out) {
                             return softmax_ce(out, labels);
                         }));
    }
    for (Aggregation mode : {Aggregation::Concat, Aggregation::Sum}) {  // composed
        DNetConfig cfg;
        cfg.hd_layers = {LayerSpec::dense(6, 4), LayerSpec::relu()};
        cfg.ld_source = LdSourceSpec::from_pca(4);
        cfg.aggregation = mode;
        cfg.fusion_width = 5;
        cfg.head = {HeadSpec::Kind::Classification, 3};
        SeededRng prng(3);
        DNetModel model = dnet_build(cfg, {1, 6}, 4, prng);
        Tensor xb({2, 6});
        for (double& v : xb.data) v = rng.normal();
        RealMatrix ld(2, 4);
        for (double& v : ld.values()) v = rng.normal();
        worst = std::max(worst, dnet_grad_check(model, xb, ld, {0, 2}));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max relative gradient error %.2e (< 1e-5)", worst);
    return {worst < 1e-5, buf};
}

std::pair<bool, std::string> criterion_ari_suite() {
    const bool exact_identity = adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 1}) == 1.0;
    const bool permutation =
        adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0 &&
        adjusted_rand_index({0, 0, 1, 1, 2, 2}, {7, 7, 3, 3, 5, 5}) == 1.0;

    const Partition a = {0, 0, 1, 1}, b = {0, 1, 0, 1};
    const double hand = adjusted_rand_index(a, b);
    const bool hand_ok =
        std::fabs(hand - ari_pair_oracle(a, b)) <= 1e-12 && std::fabs(hand + 0.5) <= 1e-12;

    std::vector<double> values;
    for (std::uint64_t t = 0; t < 100; ++t) {
        SeededRng rng(3000 + t);
        Partition p(200), q(200);
        for (std::size_t i = 0; i < 200; ++i) {
            p[i] = static_cast<int>(i % 2);
            q[i] = static_cast<int>(i % 2);
        }
        for (std::size_t i = 200; i-- > 1;) std::swap(p[i], p[rng.uniform_u64(i + 1)]);
        for (std::size_t i = 200; i-- > 1;) std::swap(q[i], q[rng.uniform_u64(i + 1)]);
        values.push_back(adjusted_rand_index(p, q));
    }
    const double median = median_of(values);

    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "identity %s, permutation %s, hand case %.3f, |median| %.4f (< 0.05)",
                  exact_identity ? "exact" : "off", permutation ? "exact" : "off", hand,
                  std::fabs(median));
    return {exact_identity && permutation && hand_ok && std::fabs(median) < 0.05, buf};
}

std::pair<bool, std::string> criterion_dual_vs_single() {
    std::vector<double> dual_epochs, single_epochs, dual_acc, single_acc;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Dataset task = convergence_task(100 + seed);
        BdrConfig bcfg;
        bcfg.r = 3;
        bcfg.seed = seed;
        const ArmRun dual = run_arm(task, seed, LdSourceSpec::from_bdr(bcfg));
        const ArmRun single = run_arm(task, seed, LdSourceSpec::none());
        dual_epochs.push_back(epochs_to_level(dual.history, 0.95));
        single_epochs.push_back(epochs_to_level(single.history, 0.95));
        dual_acc.push_back(dual.test_accuracy);
        single_acc.push_back(single.test_accuracy);
    }
    const double de = median_of(dual_epochs), se = median_of(single_epochs);
    const double da = median_of(dual_acc), sa = median_of(single_acc);
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "epochs-to-95%%: dual %g vs single %g; test acc dual %.3f vs single %.3f",
                  de, se, da, sa);
    return {2.0 * de <= se && da >= sa - 1e-12, buf};
}

std::pair<bool, std::string> criterion_component_sweep() {
    const std::size_t dim_cap = 25;  // 5 informative + 20 distractors
    std::vector<double> acc_by_r;
    for (std::size_t r : {std::size_t{2}, std::size_t{32}, std::size_t{64}}) {
        std::vector<double> accs;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Dataset task = convergence_task(100 + seed);
            BdrConfig bcfg;
            bcfg.r = std::min(r, dim_cap);  // requested counts clamp to min(D, N)
            bcfg.seed = seed;
            const ArmRun run = run_arm(task, seed, LdSourceSpec::from_bdr(bcfg), 40, 10);
            accs.push_back(run.test_accuracy);
        }
        acc_by_r.push_back(median_of(accs));
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "median acc r=2: %.3f, r=32: %.3f, r=64: %.3f",
                  acc_by_r[0], acc_by_r[1], acc_by_r[2]);
    const bool rising = acc_by_r[1] >= acc_by_r[0] - 1e-12;
    const bool plateau = std::fabs(acc_by_r[1] - acc_by_r[2]) <= 0.03;
    return {rising && plateau, buf};
}

std::pair<bool, std::string> criterion_feature_ari_trend() {
    std::vector<double> hd, fused, pre;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Dataset task = convergence_task(100 + seed);
        BdrConfig bcfg;
        bcfg.r = 3;
        bcfg.seed = seed;
        const ArmRun run = run_arm(task, seed, LdSourceSpec::from_bdr(bcfg), 40, 10);
        hd.push_back(feature_ari(extract_layer_features(run.model, run.test, LayerTag::HdOut),
                                 run.test.labels, seed));
        fused.push_back(feature_ari(
            extract_layer_features(run.model, run.test, LayerTag::Fused), run.test.labels,
            seed));
        pre.push_back(feature_ari(
            extract_layer_features(run.model, run.test, LayerTag::PreHead), run.test.labels,
            seed));
    }
    const double m_hd = median_of(hd), m_fused = median_of(fused), m_pre = median_of(pre);
    char buf[128];
    std::snprintf(buf, sizeof buf, "median ARI hd_out %.3f <= fused %.3f <= pre_head %.3f",
                  m_hd, m_fused, m_pre);
    return {m_hd <= m_fused + 1e-12 && m_fused <= m_pre + 1e-12, buf};
}

std::pair<bool, std::string> criterion_determinism() {
    const std::string base = (fs::temp_directory_path() / "dwl_acceptance").string();
    fs::remove_all(base);
    fs::create_directories(base);
    const std::string cfg_path = base + "/config.json";
    {
        std::ofstream out(cfg_path);
        out << R"({
  "seed": 11,
  "data": {"type": "blobs", "k": 3, "dim": 4, "n_per_class": 60,
           "spread": 1.0, "distractor_dims": 6, "distractor_std": 4.0},
  "bdr": {"r": 3},
  "dnet": {"hd_layers": [{"type": "dense", "out": 8}, {"type": "relu"}],
           "fusion_width": 8},
  "train": {"batch_size": 32, "max_epochs": 5, "patience": 5}
})";
    }
    if (run_cli("train --config " + cfg_path + " --out " + base + "/run1") != 0)
        return {false, "first train run failed"};
    if (run_cli("train --config " + cfg_path + " --out " + base + "/run2") != 0)
        return {false, "second train run failed"};

    bool identical = true;
    for (const char* name :
         {"metrics.json", "history.csv", "model/manifest.json", "model/fusion_0.w.dwlm",
          "model/head_0.w.dwlm", "model/ld_q_orth.dwlm"}) {
        if (read_file(base + "/run1/" + name) != read_file(base + "/run2/" + name)) {
            identical = false;
            break;
        }
    }

    // load(save(model)) reproduces predictions bit-exactly through eval
    const int eval_rc = run_cli("eval --model " + base + "/run1/model --data " + base +
                                "/run1/test_data.csv --seed 11 --out " + base + "/eval");
    const bool eval_match =
        eval_rc == 0 && read_file(base + "/eval/metrics.json") ==
                            read_file(base + "/run1/metrics.json");
    fs::remove_all(base);
    char buf[96];
    std::snprintf(buf, sizeof buf, "bundles byte-identical: %s, eval reproduces: %s",
                  identical ? "yes" : "no", eval_match ? "yes" : "no");
    return {identical && eval_match, buf};
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    run_criterion(1, "update conformance", criterion_update_conformance);
    run_criterion(2, "orthonormal projection", criterion_orthonormal_projection);
    run_criterion(3, "subspace recovery", criterion_subspace_recovery);
    run_criterion(4, "ARD auto-pruning", criterion_ard_pruning);
    run_criterion(5, "gradient correctness", criterion_gradients);
    run_criterion(6, "ARI suite", criterion_ari_suite);
    run_criterion(7, "dual vs single channel", criterion_dual_vs_single);
    run_criterion(8, "component-sweep trend", criterion_component_sweep);
    run_criterion(9, "feature-ARI trend", criterion_feature_ari_trend);
    run_criterion(10, "determinism + persistence", criterion_determinism);
    if (g_failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria failed\n", g_failures);
    return g_failures;
}

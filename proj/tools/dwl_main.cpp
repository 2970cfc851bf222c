// dwl: deep-and-wide learning toolkit command line.
//
// Subcommands: gen-data, bdr-fit, train, eval, sweep-components,
// export-features. Exit codes: 0 success, 2 config/validation error,
// 3 I/O error, 4 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "dwl/commands.hpp"
#include "dwl/errors.hpp"

namespace {

dwl::RunConfig load_config_with_overrides(const std::string& config_path,
                                          const std::string& out_dir, bool seed_given,
                                          std::uint64_t seed, const std::string& channel,
                                          const std::string& ld) {
    dwl::RunConfig cfg = dwl::load_run_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed_given) {
        cfg.seed = seed;
        if (!cfg.split_seed_set) cfg.split.seed = seed;
        if (!cfg.bdr_seed_set) cfg.bdr.seed = seed;
        if (!cfg.train_seed_set) cfg.train.seed = seed;
    }
    if (channel == "single") cfg.ld_kind = "none";
    else if (channel == "dual" && cfg.ld_kind == "none") cfg.ld_kind = "bdr";
    if (!ld.empty()) cfg.ld_kind = ld;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dwl: dual-channel learning with Bayesian dimensionality reduction"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
    std::string gen_kind;
    gen->add_option("generator", gen_kind, "blobs | bars | lowrank")->required();
    dwl::DataSpec gspec;
    std::uint64_t gen_seed = 0;
    std::string gen_out = "out";
    gen->add_option("--k", gspec.k, "cluster count (blobs)");
    gen->add_option("--dim", gspec.dim, "informative dimensions (blobs)");
    gen->add_option("--n", gspec.n_per_class, "samples per class (blobs/bars)");
    gen->add_option("--spread", gspec.spread, "within-cluster std (blobs)");
    gen->add_option("--distractors", gspec.distractor_dims, "noise dimensions (blobs)");
    gen->add_option("--distractor-std", gspec.distractor_std, "noise std (blobs)");
    gen->add_option("--size", gspec.size, "image side (bars)");
    gen->add_option("--d", gspec.d, "dimension (lowrank)");
    gen->add_option("--n-total", gspec.n, "sample count (lowrank)");
    gen->add_option("--rank", gspec.rank, "true rank (lowrank)");
    gen->add_option("--noise-std", gspec.noise_std, "noise std (lowrank)");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output directory");

    // bdr-fit
    auto* bfit = app.add_subcommand("bdr-fit", "fit the Bayesian projector on a dataset");
    std::string bdr_data, bdr_label = "label", bdr_out = "out", bdr_prior = "ard";
    dwl::BdrConfig bdr_cfg;
    bfit->add_option("--data", bdr_data, "dataset path (.csv or .dwlm)")->required();
    bfit->add_option("--label-column", bdr_label, "label column for csv data");
    bfit->add_option("--r", bdr_cfg.r, "component count")->required();
    bfit->add_option("--prior", bdr_prior, "ard | elementwise");
    bfit->add_option("--sigma-z-sq", bdr_cfg.sigma_z_sq, "latent noise variance");
    bfit->add_option("--alpha-phi", bdr_cfg.alpha_phi, "gamma prior shape");
    bfit->add_option("--beta-phi", bdr_cfg.beta_phi, "gamma prior scale");
    bfit->add_option("--max-iter", bdr_cfg.max_iter, "iteration cap");
    bfit->add_option("--tol", bdr_cfg.tol, "convergence threshold");
    bfit->add_option("--seed", bdr_cfg.seed, "initialization seed");
    bfit->add_option("--prune-threshold", bdr_cfg.prune_threshold, "pruning dynamic range");
    bool bdr_no_center = false;
    bfit->add_flag("--no-center", bdr_no_center, "skip centering");
    bfit->add_option("--out", bdr_out, "output directory");

    // train
    auto* train = app.add_subcommand("train", "train a model from a config file");
    std::string train_config, train_out, train_channel = "dual", train_ld;
    std::uint64_t train_seed = 0;
    std::size_t train_seeds = 1;
    train->add_option("--config", train_config, "JSON run configuration")->required();
    train->add_option("--out", train_out, "output directory (overrides config)");
    auto* train_seed_opt = train->add_option("--seed", train_seed, "global seed override");
    train->add_option("--seeds", train_seeds, "number of seeds (parallel arms)");
    train->add_option("--channel", train_channel, "dual | single")
        ->check(CLI::IsMember({"dual", "single"}));
    train->add_option("--ld", train_ld, "bdr | pca | none")
        ->check(CLI::IsMember({"bdr", "pca", "none"}));

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a saved model on a dataset");
    std::string eval_model, eval_data, eval_label = "label", eval_out = "out";
    std::uint64_t eval_seed = 0;
    eval->add_option("--model", eval_model, "model bundle directory")->required();
    eval->add_option("--data", eval_data, "dataset path (.csv or .dwlm)")->required();
    eval->add_option("--label-column", eval_label, "label column for csv data");
    eval->add_option("--seed", eval_seed, "k-means seed for feature ARI");
    eval->add_option("--out", eval_out, "output directory");

    // sweep-components
    auto* sweep = app.add_subcommand("sweep-components",
                                     "train across a list of component counts");
    std::string sweep_config, sweep_out = "out", sweep_channel = "dual", sweep_ld;
    std::vector<std::size_t> sweep_r;
    std::uint64_t sweep_seed = 0;
    std::size_t sweep_seeds = 1;
    sweep->add_option("--config", sweep_config, "JSON run configuration")->required();
    sweep->add_option("--r-list", sweep_r, "component counts")->required()->delimiter(',');
    auto* sweep_seed_opt = sweep->add_option("--seed", sweep_seed, "base seed override");
    sweep->add_option("--seeds", sweep_seeds, "seeds per component count");
    sweep->add_option("--out", sweep_out, "output directory");

    // export-features
    auto* exp = app.add_subcommand("export-features", "dump layer activations");
    std::string exp_model, exp_data, exp_label = "label", exp_layer = "pre_head",
                exp_out = "out";
    exp->add_option("--model", exp_model, "model bundle directory")->required();
    exp->add_option("--data", exp_data, "dataset path (.csv or .dwlm)")->required();
    exp->add_option("--label-column", exp_label, "label column for csv data");
    exp->add_option("--layer", exp_layer, "hd_out | fused | pre_head");
    exp->add_option("--out", exp_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (*gen) {
            if (gen_kind == "blobs")
                gspec.kind = dwl::DataSpec::Kind::Blobs;
            else if (gen_kind == "bars")
                gspec.kind = dwl::DataSpec::Kind::Bars;
            else if (gen_kind == "lowrank")
                gspec.kind = dwl::DataSpec::Kind::Lowrank;
            else
                throw dwl::BadConfig("gen-data: unknown generator '" + gen_kind + "'");
            dwl::cli::run_gen_data(gspec, gen_seed, gen_out);
        } else if (*bfit) {
            if (bdr_prior == "ard")
                bdr_cfg.prior_mode = dwl::PriorMode::Ard;
            else if (bdr_prior == "elementwise")
                bdr_cfg.prior_mode = dwl::PriorMode::ElementWise;
            else
                throw dwl::BadConfig("bdr-fit: prior must be ard or elementwise");
            bdr_cfg.center_data = !bdr_no_center;
            dwl::cli::run_bdr_fit(bdr_data, bdr_label, bdr_cfg, bdr_out);
        } else if (*train) {
            dwl::RunConfig cfg = load_config_with_overrides(
                train_config, train_out, train_seed_opt->count() > 0, train_seed,
                train_channel, train_ld);
            dwl::cli::run_train(cfg, train_seeds);
        } else if (*eval) {
            dwl::cli::run_eval(eval_model, eval_data, eval_label, eval_seed, eval_out);
        } else if (*sweep) {
            dwl::RunConfig cfg = load_config_with_overrides(
                sweep_config, sweep_out, sweep_seed_opt->count() > 0, sweep_seed,
                sweep_channel, sweep_ld);
            dwl::cli::run_sweep(cfg, sweep_r, sweep_seeds, sweep_out);
        } else if (*exp) {
            dwl::cli::run_export_features(exp_model, exp_data, exp_label, exp_layer, exp_out);
        }
    } catch (const dwl::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const dwl::NumericalFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const dwl::NanLoss& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const dwl::NotSpd& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const dwl::RankDeficient& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const dwl::NoConvergence& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const dwl::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
    return 0;
}

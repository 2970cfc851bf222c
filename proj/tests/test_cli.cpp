// End-to-end checks of the command-line tool: every command runs as a child
// process of the built binary (path injected via DWL_CLI_PATH).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "dwl/matrix_io.hpp"
#include "dwl/metrics.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string out_file =
        (fs::temp_directory_path() / "dwl_cli_stdout.txt").string();
    const std::string cmd =
        std::string(DWL_CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
    const int raw = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WEXITSTATUS(raw);
    std::ifstream in(out_file);
    res.output.assign(std::istreambuf_iterator<char>(in),
                      std::istreambuf_iterator<char>());
    return res;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fresh_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

void write_config(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    REQUIRE(out);
    out << body;
}

const char* kTinyConfig = R"({
  "seed": 3,
  "data": {"type": "blobs", "k": 3, "dim": 4, "n_per_class": 60,
           "spread": 1.0, "distractor_dims": 6, "distractor_std": 4.0},
  "bdr": {"r": 3},
  "dnet": {"hd_layers": [{"type": "dense", "out": 8}, {"type": "relu"}],
           "fusion_width": 8},
  "train": {"batch_size": 32, "max_epochs": 6, "patience": 6}
})";

}  // namespace

TEST_CASE("gen-data: shapes, determinism, validation exit code") {
    const std::string dir1 = fresh_dir("dwl_cli_gen1");
    const std::string dir2 = fresh_dir("dwl_cli_gen2");
    RunResult r1 = run_cli("gen-data blobs --k 3 --dim 5 --n 100 --seed 7 --out " + dir1);
    CHECK(r1.exit_code == 0);
    CHECK(r1.output.find("N=300") != std::string::npos);

    RunResult r2 = run_cli("gen-data blobs --k 3 --dim 5 --n 100 --seed 7 --out " + dir2);
    CHECK(r2.exit_code == 0);
    CHECK(read_file(dir1 + "/data.csv") == read_file(dir2 + "/data.csv"));

    RunResult missing = run_cli("gen-data");
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("generator") != std::string::npos);

    // images land as dwlm + labels + meta
    const std::string dir3 = fresh_dir("dwl_cli_gen3");
    RunResult r3 = run_cli("gen-data bars --size 8 --n 20 --seed 1 --out " + dir3);
    CHECK(r3.exit_code == 0);
    CHECK(fs::exists(dir3 + "/images.dwlm"));
    CHECK(fs::exists(dir3 + "/images.labels.csv"));
    CHECK(fs::exists(dir3 + "/images.meta.json"));
}

TEST_CASE("bdr-fit: report line, pruning, byte-identical reruns, validation") {
    const std::string data_dir = fresh_dir("dwl_cli_bdrdata");
    REQUIRE(run_cli("gen-data lowrank --d 20 --n-total 200 --rank 2 --noise-std 0.01 "
                    "--seed 5 --out " + data_dir).exit_code == 0);

    const std::string fit1 = fresh_dir("dwl_cli_fit1");
    RunResult r1 = run_cli("bdr-fit --data " + data_dir + "/data.csv --r 6 --prior ard "
                           "--seed 2 --out " + fit1);
    CHECK(r1.exit_code == 0);
    CHECK(r1.output.find("\"retained\":") != std::string::npos);
    // rank-2 data: most of the 6 components prune away
    CHECK(r1.output.find("\"retained\":2") != std::string::npos);

    const std::string fit2 = fresh_dir("dwl_cli_fit2");
    RunResult r2 = run_cli("bdr-fit --data " + data_dir + "/data.csv --r 6 --prior ard "
                           "--seed 2 --out " + fit2);
    CHECK(r2.exit_code == 0);
    CHECK(read_file(fit1 + "/model/q_orth.dwlm") == read_file(fit2 + "/model/q_orth.dwlm"));
    CHECK(read_file(fit1 + "/model/manifest.json") ==
          read_file(fit2 + "/model/manifest.json"));

    CHECK(run_cli("bdr-fit --data " + data_dir + "/data.csv --r 0 --out " + fit1)
              .exit_code == 2);
    CHECK(run_cli("bdr-fit --data " + data_dir + "/missing.csv --r 2 --out " + fit1)
              .exit_code == 3);
}

TEST_CASE("train: artifacts, history rows, eval equivalence, determinism") {
    const std::string cfg_path =
        (fs::temp_directory_path() / "dwl_cli_cfg.json").string();
    write_config(cfg_path, kTinyConfig);

    const std::string out1 = fresh_dir("dwl_cli_train1");
    RunResult r1 = run_cli("train --config " + cfg_path + " --out " + out1);
    CHECK(r1.exit_code == 0);
    CHECK(fs::exists(out1 + "/metrics.json"));
    CHECK(fs::exists(out1 + "/history.csv"));
    CHECK(fs::exists(out1 + "/effective_config.json"));
    CHECK(fs::exists(out1 + "/model/manifest.json"));
    CHECK(fs::exists(out1 + "/test_data.csv"));

    // history rows equal epochs run (header + one line per epoch)
    {
        std::ifstream in(out1 + "/history.csv");
        std::string line;
        std::getline(in, line);
        CHECK(line == "epoch,train_loss,train_acc,val_loss,val_acc");
        std::size_t rows = 0;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows >= 1);
        CHECK(rows <= 6);
    }

    // reruns are byte-identical
    const std::string out2 = fresh_dir("dwl_cli_train2");
    RunResult r2 = run_cli("train --config " + cfg_path + " --out " + out2);
    CHECK(r2.exit_code == 0);
    CHECK(read_file(out1 + "/metrics.json") == read_file(out2 + "/metrics.json"));
    CHECK(read_file(out1 + "/model/fusion_0.w.dwlm") ==
          read_file(out2 + "/model/fusion_0.w.dwlm"));
    CHECK(read_file(out1 + "/history.csv") == read_file(out2 + "/history.csv"));

    // eval on the written test split reproduces the training metrics exactly
    const std::string eval_out = fresh_dir("dwl_cli_eval");
    RunResult ev = run_cli("eval --model " + out1 + "/model --data " + out1 +
                           "/test_data.csv --seed 3 --out " + eval_out);
    CHECK(ev.exit_code == 0);
    CHECK(read_file(eval_out + "/metrics.json") == read_file(out1 + "/metrics.json"));

    // single-channel flag equals ld none bit-exactly
    const std::string single1 = fresh_dir("dwl_cli_single1");
    const std::string single2 = fresh_dir("dwl_cli_single2");
    CHECK(run_cli("train --config " + cfg_path + " --channel single --out " + single1)
              .exit_code == 0);
    CHECK(run_cli("train --config " + cfg_path + " --ld none --out " + single2)
              .exit_code == 0);
    CHECK(read_file(single1 + "/metrics.json") == read_file(single2 + "/metrics.json"));
    CHECK(read_file(single1 + "/history.csv") == read_file(single2 + "/history.csv"));

    // config validation: unknown keys rejected
    const std::string bad_cfg =
        (fs::temp_directory_path() / "dwl_cli_bad.json").string();
    write_config(bad_cfg, R"({"seed": 1, "data": {"type": "blobs"}, "typo_key": 1})");
    CHECK(run_cli("train --config " + bad_cfg + " --out " + out1).exit_code == 2);
}

TEST_CASE("export-features: width contract and ARI round-trip") {
    const std::string cfg_path =
        (fs::temp_directory_path() / "dwl_cli_cfg2.json").string();
    write_config(cfg_path, kTinyConfig);
    const std::string out = fresh_dir("dwl_cli_train_exp");
    REQUIRE(run_cli("train --config " + cfg_path + " --out " + out).exit_code == 0);

    const std::string exp = fresh_dir("dwl_cli_export");
    RunResult r = run_cli("export-features --model " + out + "/model --data " + out +
                          "/test_data.csv --layer pre_head --out " + exp);
    CHECK(r.exit_code == 0);

    const dwl::RealMatrix feats = dwl::read_dwlm(exp + "/features.dwlm");
    CHECK(feats.cols() == 8);  // fusion_width from the config

    // re-scoring the exported features reproduces the in-memory metric
    const std::vector<int> labels = dwl::read_labels_csv(exp + "/labels.csv");
    const double ari = dwl::feature_ari(feats, labels, 3);
    const std::string metrics = read_file(out + "/metrics.json");
    char needle[64];
    std::snprintf(needle, sizeof needle, "%.6f", ari);
    // metrics.json stores full precision; compare by reparsing
    const auto pos = metrics.find("\"pre_head\":");
    REQUIRE(pos != std::string::npos);
    const double recorded = std::strtod(metrics.c_str() + pos + 11, nullptr);
    CHECK(recorded == doctest::Approx(ari).epsilon(1e-12));

    // binary and csv mirrors agree bit-exactly on reparse
    CHECK(dwl::read_matrix_csv(exp + "/features.csv") == feats);

    CHECK(run_cli("export-features --model " + out + "/model --data " + out +
                  "/test_data.csv --layer bogus --out " + exp).exit_code == 2);
}

TEST_CASE("sweep-components: per-seed rows plus medians") {
    const std::string cfg_path =
        (fs::temp_directory_path() / "dwl_cli_cfg3.json").string();
    write_config(cfg_path, kTinyConfig);
    const std::string out = fresh_dir("dwl_cli_sweep");
    RunResult r = run_cli("sweep-components --config " + cfg_path +
                          " --r-list 2,4 --seeds 2 --out " + out);
    CHECK(r.exit_code == 0);
    std::ifstream in(out + "/sweep.csv");
    REQUIRE(in);
    std::string line;
    std::getline(in, line);
    CHECK(line == "r,seed,test_accuracy,epochs_to_95pct_of_best,wall_time_s");
    std::size_t rows = 0, medians = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        if (line.find(",median,") != std::string::npos) ++medians;
    }
    CHECK(rows == 6);     // 2 r-values x (2 seeds + 1 median)
    CHECK(medians == 2);
}

TEST_CASE("eval: dimension mismatch exits 2, missing files exit 3") {
    const std::string cfg_path =
        (fs::temp_directory_path() / "dwl_cli_cfg4.json").string();
    write_config(cfg_path, kTinyConfig);
    const std::string out = fresh_dir("dwl_cli_train_eval");
    REQUIRE(run_cli("train --config " + cfg_path + " --out " + out).exit_code == 0);

    // dataset with the wrong dimensionality
    const std::string other = fresh_dir("dwl_cli_otherdata");
    REQUIRE(run_cli("gen-data blobs --k 2 --dim 3 --n 30 --seed 1 --out " + other)
                .exit_code == 0);
    RunResult bad = run_cli("eval --model " + out + "/model --data " + other +
                            "/data.csv --out " + other);
    CHECK(bad.exit_code == 2);

    CHECK(run_cli("eval --model " + out + "/model --data nowhere.csv --out " + other)
              .exit_code == 3);
    CHECK(run_cli("eval --model nowhere --data " + other + "/data.csv --out " + other)
              .exit_code == 3);
}

#include "dwl/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "dwl/bundle.hpp"
#include "dwl/matrix_io.hpp"
#include "dwl/metrics.hpp"

namespace dwl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

void write_dataset_files(const Dataset& ds, const std::string& dir, const std::string& stem) {
    if (ds.image_shape) {
        write_dwlm(ds.x, dir + "/" + stem + ".dwlm");
        write_labels_csv(ds.labels, dir + "/" + stem + ".labels.csv");
        json meta;
        meta["image_shape"] = {(*ds.image_shape)[0], (*ds.image_shape)[1],
                               (*ds.image_shape)[2]};
        write_text(dir + "/" + stem + ".meta.json", meta.dump(2) + "\n");
    } else {
        save_csv(ds, dir + "/" + stem + ".csv");
    }
}

std::size_t infer_classes(const Dataset& ds) {
    int top = -1;
    for (int lbl : ds.labels) top = std::max(top, lbl);
    if (top < 0) throw BadConfig("dataset has no labels to infer a class count from");
    return static_cast<std::size_t>(top) + 1;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json metrics_json(const DNetModel& model, const Dataset& data, std::uint64_t seed) {
    const std::vector<int> pred = dnet_predict(model, data);
    const double acc = accuracy(pred, data.labels);
    const std::size_t k = model.config.head.out;
    const ConfusionMatrix cm = confusion(pred, data.labels, k);

    json conf = json::array();
    for (std::size_t i = 0; i < k; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < k; ++j) row.push_back(cm.at(i, j));
        conf.push_back(row);
    }
    json ari;
    for (LayerTag tag : {LayerTag::HdOut, LayerTag::Fused, LayerTag::PreHead}) {
        const RealMatrix feats = extract_layer_features(model, data, tag);
        ari[layer_tag_name(tag)] = feature_ari(feats, data.labels, seed);
    }
    json out;
    out["accuracy"] = acc;
    out["confusion"] = conf;
    out["feature_ari"] = ari;
    out["n_samples"] = data.n();
    out["kmeans_seed"] = seed;
    return out;
}

void print_metrics_table(const json& metrics) {
    std::printf("test accuracy    %.4f\n", metrics.at("accuracy").get<double>());
    const json& ari = metrics.at("feature_ari");
    std::printf("feature ARI      hd_out %.4f  fused %.4f  pre_head %.4f\n",
                ari.at("hd_out").get<double>(), ari.at("fused").get<double>(),
                ari.at("pre_head").get<double>());
    std::printf("confusion (rows = truth)\n");
    for (const auto& row : metrics.at("confusion")) {
        std::printf(" ");
        for (const auto& cell : row) std::printf(" %6lld", cell.get<long long>());
        std::printf("\n");
    }
}

void write_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
    for (std::size_t e = 0; e < history.epochs(); ++e)
        out << (e + 1) << ',' << format_double(history.train_loss[e]) << ','
            << format_double(history.train_acc[e]) << ','
            << format_double(history.val_loss[e]) << ','
            << format_double(history.val_acc[e]) << '\n';
}

struct TrainOutcome {
    json metrics;
    TrainHistory history;
};

// One complete training run: data realization, split, standardization,
// LD fit, training, test metrics, artifacts on disk.
TrainOutcome train_pipeline(const RunConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const Dataset dataset = realize_dataset(cfg.data, cfg.seed);
    const SplitResult splits = split(dataset, cfg.split);

    const bool standardize = cfg.standardize.value_or(!dataset.image_shape.has_value());
    Dataset train = splits.train, val = splits.val, test = splits.test;
    std::optional<StandardizeStats> x_stats;
    if (standardize) {
        x_stats = standardize_fit(splits.train);
        train = standardize_apply(*x_stats, splits.train);
        val = standardize_apply(*x_stats, splits.val);
        test = standardize_apply(*x_stats, splits.test);
    }

    DNetConfig dnet_cfg;
    std::vector<LayerSpec> protos =
        cfg.hd_layer_protos.empty() ? default_hd_layers(dataset) : cfg.hd_layer_protos;
    std::vector<std::size_t> input_shape;
    const bool image_first =
        dataset.image_shape && !protos.empty() &&
        (protos.front().kind == LayerSpec::Kind::Conv2d ||
         protos.front().kind == LayerSpec::Kind::MaxPool2 ||
         protos.front().kind == LayerSpec::Kind::Flatten);
    if (image_first) {
        const auto& shp = *dataset.image_shape;
        input_shape = {1, shp[0], shp[1], shp[2]};
    } else {
        input_shape = {1, dataset.dim()};
    }
    dnet_cfg.hd_layers = resolve_hd_layers(protos, input_shape);
    if (cfg.ld_kind == "bdr")
        dnet_cfg.ld_source = LdSourceSpec::from_bdr(cfg.bdr);
    else if (cfg.ld_kind == "pca")
        dnet_cfg.ld_source = LdSourceSpec::from_pca(cfg.pca_r);
    else
        dnet_cfg.ld_source = LdSourceSpec::none();
    dnet_cfg.aggregation = cfg.aggregation;
    dnet_cfg.fusion_width = cfg.fusion_width;
    dnet_cfg.fusion_relu = cfg.fusion_relu;
    dnet_cfg.head = cfg.head;
    if (dnet_cfg.head.out == 0) {
        if (dnet_cfg.head.kind == HeadSpec::Kind::Classification)
            dnet_cfg.head.out = infer_classes(dataset);
        else if (dataset.targets.rows() > 0)
            dnet_cfg.head.out = dataset.targets.rows();
        else
            throw BadConfig("config: regression head needs regression_out or targets");
    }
    dnet_cfg.ld_standardize = cfg.ld_standardize;

    auto [model, history] = dnet_train(dnet_cfg, cfg.train, train, val);

    TrainOutcome outcome;
    outcome.metrics = metrics_json(model, test, cfg.seed);
    outcome.history = history;

    // artifacts: effective config, history, metrics, the model bundle, and
    // the raw (pre-standardization) test split for later evaluation
    write_text(out_dir + "/effective_config.json", run_config_to_json(cfg).dump(2) + "\n");
    write_history_csv(history, out_dir + "/history.csv");
    write_text(out_dir + "/metrics.json", outcome.metrics.dump(2) + "\n");
    ModelBundle bundle;
    bundle.model = std::move(model);
    bundle.x_stats = x_stats;
    bundle.metrics_summary = outcome.metrics;
    save_bundle(bundle, out_dir + "/model");
    write_dataset_files(splits.test, out_dir, "test_data");
    return outcome;
}

std::size_t epochs_to_fraction_of_best(const TrainHistory& history, double fraction) {
    double best = -1e300;
    for (double v : history.val_acc) best = std::max(best, v);
    const double level = fraction * best;
    for (std::size_t e = 0; e < history.epochs(); ++e)
        if (history.val_acc[e] >= level) return e + 1;
    return history.epochs() + 1;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

Dataset load_dataset_path(const std::string& path, const std::string& label_column) {
    DataSpec spec;
    if (ends_with(path, ".dwlm")) {
        spec.kind = DataSpec::Kind::Images;
        spec.path = path;
    } else if (ends_with(path, ".csv")) {
        spec.kind = DataSpec::Kind::Csv;
        spec.path = path;
        spec.label_column = label_column;
    } else {
        throw BadConfig("data path must end in .csv or .dwlm: " + path);
    }
    Dataset ds = realize_dataset(spec, 0);

    // When every label token is a small non-negative integer, keep the
    // numeric values as class indices so saved splits evaluate against the
    // same classes they were trained with.
    if (!ds.label_names.empty()) {
        std::vector<int> numeric(ds.label_names.size());
        bool all_numeric = true;
        for (std::size_t i = 0; i < ds.label_names.size() && all_numeric; ++i) {
            const std::string& tok = ds.label_names[i];
            all_numeric = !tok.empty() && tok.size() <= 6 &&
                          tok.find_first_not_of("0123456789") == std::string::npos;
            if (all_numeric) numeric[i] = std::stoi(tok);
        }
        if (all_numeric) {
            int top = 0;
            for (int v : numeric) top = std::max(top, v);
            for (int& lbl : ds.labels) lbl = numeric[static_cast<std::size_t>(lbl)];
            ds.label_names.assign(static_cast<std::size_t>(top) + 1, "");
            for (std::size_t v = 0; v < ds.label_names.size(); ++v)
                ds.label_names[v] = std::to_string(v);
        }
    }
    return ds;
}

void run_gen_data(const DataSpec& spec, std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    DataSpec seeded = spec;
    if (!seeded.seed) seeded.seed = seed;
    const Dataset ds = realize_dataset(seeded, seed);
    write_dataset_files(ds, out_dir, ds.image_shape ? "images" : "data");

    std::set<int> classes(ds.labels.begin(), ds.labels.end());
    std::printf("wrote %s: D=%zu N=%zu classes=%zu%s\n",
                (out_dir + (ds.image_shape ? "/images.dwlm" : "/data.csv")).c_str(), ds.dim(),
                ds.n(), classes.size(), ds.image_shape ? " (images)" : "");
}

void run_bdr_fit(const std::string& data_path, const std::string& label_column,
                 const BdrConfig& cfg, const std::string& out_dir) {
    const Dataset ds = load_dataset_path(data_path, label_column);
    auto [model, report] = bdr_fit(ds.x, cfg);
    fs::create_directories(out_dir);
    save_bdr_bundle(model, out_dir + "/model");

    json line;
    line["iterations"] = report.iterations_run;
    line["converged"] = report.converged;
    line["retained"] = model.retained.size();
    line["final_delta"] = report.final_delta;
    std::printf("%s\n", line.dump().c_str());
}

void run_train(RunConfig cfg, std::size_t n_seeds) {
    if (n_seeds == 0) throw BadConfig("train: --seeds must be >= 1");
    if (n_seeds == 1) {
        const TrainOutcome outcome = train_pipeline(cfg, cfg.output_dir);
        std::printf("epochs run       %zu (best %zu%s)\n", outcome.history.epochs(),
                    outcome.history.best_epoch,
                    outcome.history.stopped_early ? ", stopped early" : "");
        print_metrics_table(outcome.metrics);
        json line;
        line["accuracy"] = outcome.metrics.at("accuracy");
        line["epochs"] = outcome.history.epochs();
        line["best_epoch"] = outcome.history.best_epoch;
        std::printf("%s\n", line.dump().c_str());
        return;
    }
    const std::uint64_t base = cfg.seed;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        RunConfig sub = cfg;
        sub.seed = base + s;
        if (!sub.split_seed_set) sub.split.seed = sub.seed;
        if (!sub.bdr_seed_set) sub.bdr.seed = sub.seed;
        if (!sub.train_seed_set) sub.train.seed = sub.seed;
        const std::string dir = cfg.output_dir + "/seed_" + std::to_string(sub.seed);
        const TrainOutcome outcome = train_pipeline(sub, dir);
        std::printf("seed %llu: accuracy %.4f epochs %zu\n",
                    static_cast<unsigned long long>(sub.seed),
                    outcome.metrics.at("accuracy").get<double>(), outcome.history.epochs());
    }
}

void run_eval(const std::string& model_dir, const std::string& data_path,
              const std::string& label_column, std::uint64_t seed,
              const std::string& out_dir) {
    const ModelBundle bundle = load_bundle(model_dir);
    Dataset data = load_dataset_path(data_path, label_column);
    if (bundle.x_stats) data = standardize_apply(*bundle.x_stats, data);
    const json metrics = metrics_json(bundle.model, data, seed);
    fs::create_directories(out_dir);
    write_text(out_dir + "/metrics.json", metrics.dump(2) + "\n");
    print_metrics_table(metrics);
}

void run_sweep(RunConfig cfg, const std::vector<std::size_t>& r_list, std::size_t n_seeds,
               const std::string& out_dir) {
    if (r_list.empty()) throw BadConfig("sweep: need at least one r value");
    if (n_seeds == 0) throw BadConfig("sweep: --seeds must be >= 1");
    fs::create_directories(out_dir);

    // component counts clamp to the data dimension: requested values beyond
    // min(D, N_train) fit at the cap
    const Dataset probe = realize_dataset(cfg.data, cfg.seed);
    const std::size_t d_cap = probe.dim();

    std::ofstream csv(out_dir + "/sweep.csv");
    if (!csv) throw IoError("cannot write " + out_dir + "/sweep.csv");
    csv << "r,seed,test_accuracy,epochs_to_95pct_of_best,wall_time_s\n";

    const std::uint64_t base = cfg.seed;
    for (std::size_t r : r_list) {
        std::vector<double> accs, epochs, times;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            RunConfig sub = cfg;
            sub.seed = base + s;
            if (!sub.split_seed_set) sub.split.seed = sub.seed;
            if (!sub.bdr_seed_set) sub.bdr.seed = sub.seed;
            if (!sub.train_seed_set) sub.train.seed = sub.seed;
            sub.bdr.r = std::min(r, d_cap);
            sub.pca_r = std::min(r, d_cap);
            const std::string dir =
                out_dir + "/r" + std::to_string(r) + "_seed" + std::to_string(sub.seed);
            const auto t0 = std::chrono::steady_clock::now();
            const TrainOutcome outcome = train_pipeline(sub, dir);
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const double acc = outcome.metrics.at("accuracy").get<double>();
            const double e95 =
                static_cast<double>(epochs_to_fraction_of_best(outcome.history, 0.95));
            accs.push_back(acc);
            epochs.push_back(e95);
            times.push_back(secs);
            csv << r << ',' << sub.seed << ',' << format_double(acc) << ',' << e95 << ','
                << format_double(secs) << '\n';
        }
        csv << r << ",median," << format_double(median_of(accs)) << ','
            << median_of(epochs) << ',' << format_double(median_of(times)) << '\n';
        std::printf("r=%zu: median accuracy %.4f, median epochs-to-95%% %g\n", r,
                    median_of(accs), median_of(epochs));
    }
}

void run_export_features(const std::string& model_dir, const std::string& data_path,
                         const std::string& label_column, const std::string& layer,
                         const std::string& out_dir) {
    const ModelBundle bundle = load_bundle(model_dir);
    Dataset data = load_dataset_path(data_path, label_column);
    if (bundle.x_stats) data = standardize_apply(*bundle.x_stats, data);
    const LayerTag tag = layer_tag_from_string(layer);
    const RealMatrix features = extract_layer_features(bundle.model, data, tag);
    fs::create_directories(out_dir);
    write_dwlm(features, out_dir + "/features.dwlm");
    write_matrix_csv(features, out_dir + "/features.csv");
    write_labels_csv(data.labels, out_dir + "/labels.csv");
    std::printf("wrote %zu x %zu %s features to %s\n", features.rows(), features.cols(),
                layer.c_str(), out_dir.c_str());
}

}  // namespace dwl::cli

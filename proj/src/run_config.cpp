#include "dwl/run_config.hpp"

#include <fstream>
#include <set>

#include "dwl/errors.hpp"
#include "dwl/matrix_io.hpp"

namespace dwl {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw BadConfig("config: unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw BadConfig("config: bad value for '" + key + "': " + e.what());
    }
}

DataSpec parse_data(const json& j, const std::string& where) {
    if (!j.is_object()) throw BadConfig("config: " + where + " must be an object");
    const std::string type = get_or<std::string>(j, "type", "");
    DataSpec spec;
    if (type == "blobs") {
        reject_unknown_keys(j, {"type", "k", "dim", "n_per_class", "spread",
                                "distractor_dims", "distractor_std", "seed"}, where);
        spec.kind = DataSpec::Kind::Blobs;
        spec.k = get_or<std::size_t>(j, "k", 3);
        spec.dim = get_or<std::size_t>(j, "dim", 5);
        spec.n_per_class = get_or<std::size_t>(j, "n_per_class", 100);
        spec.spread = get_or<double>(j, "spread", 1.0);
        spec.distractor_dims = get_or<std::size_t>(j, "distractor_dims", 0);
        spec.distractor_std = get_or<double>(j, "distractor_std", 1.0);
    } else if (type == "bars") {
        reject_unknown_keys(j, {"type", "size", "n_per_class", "seed"}, where);
        spec.kind = DataSpec::Kind::Bars;
        spec.size = get_or<std::size_t>(j, "size", 8);
        spec.n_per_class = get_or<std::size_t>(j, "n_per_class", 100);
    } else if (type == "lowrank") {
        reject_unknown_keys(j, {"type", "d", "n", "rank", "noise_std", "seed"}, where);
        spec.kind = DataSpec::Kind::Lowrank;
        spec.d = get_or<std::size_t>(j, "d", 20);
        spec.n = get_or<std::size_t>(j, "n", 200);
        spec.rank = get_or<std::size_t>(j, "rank", 3);
        spec.noise_std = get_or<double>(j, "noise_std", 0.01);
    } else if (type == "csv") {
        reject_unknown_keys(j, {"type", "path", "label_column"}, where);
        spec.kind = DataSpec::Kind::Csv;
        spec.path = get_or<std::string>(j, "path", "");
        spec.label_column = get_or<std::string>(j, "label_column", "label");
        if (spec.path.empty()) throw BadConfig("config: csv data needs a path");
    } else if (type == "images") {
        reject_unknown_keys(j, {"type", "path"}, where);
        spec.kind = DataSpec::Kind::Images;
        spec.path = get_or<std::string>(j, "path", "");
        if (spec.path.empty()) throw BadConfig("config: images data needs a path");
    } else {
        throw BadConfig("config: data.type must be blobs, bars, lowrank, csv or images");
    }
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

BdrConfig parse_bdr(const json& j, bool& seed_set) {
    reject_unknown_keys(j, {"r", "prior", "sigma_z_sq", "alpha_phi", "beta_phi", "max_iter",
                            "tol", "seed", "center", "prune_threshold"}, "bdr");
    BdrConfig cfg;
    cfg.r = get_or<std::size_t>(j, "r", 8);
    const std::string prior = get_or<std::string>(j, "prior", "ard");
    if (prior == "ard")
        cfg.prior_mode = PriorMode::Ard;
    else if (prior == "elementwise")
        cfg.prior_mode = PriorMode::ElementWise;
    else
        throw BadConfig("config: bdr.prior must be 'ard' or 'elementwise'");
    cfg.sigma_z_sq = get_or<double>(j, "sigma_z_sq", cfg.sigma_z_sq);
    cfg.alpha_phi = get_or<double>(j, "alpha_phi", cfg.alpha_phi);
    cfg.beta_phi = get_or<double>(j, "beta_phi", cfg.beta_phi);
    cfg.max_iter = get_or<std::size_t>(j, "max_iter", cfg.max_iter);
    cfg.tol = get_or<double>(j, "tol", cfg.tol);
    cfg.center_data = get_or<bool>(j, "center", cfg.center_data);
    cfg.prune_threshold = get_or<double>(j, "prune_threshold", cfg.prune_threshold);
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
        seed_set = true;
    }
    return cfg;
}

TrainConfig parse_train(const json& j, bool& seed_set) {
    reject_unknown_keys(j, {"batch_size", "max_epochs", "patience", "lr", "seed",
                            "shuffle_each_epoch", "augment"}, "train");
    TrainConfig cfg;
    cfg.batch_size = get_or<std::size_t>(j, "batch_size", cfg.batch_size);
    cfg.max_epochs = get_or<std::size_t>(j, "max_epochs", cfg.max_epochs);
    cfg.patience = get_or<std::size_t>(j, "patience", cfg.patience);
    cfg.lr = get_or<double>(j, "lr", cfg.lr);
    cfg.shuffle_each_epoch = get_or<bool>(j, "shuffle_each_epoch", cfg.shuffle_each_epoch);
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
        seed_set = true;
    }
    if (j.contains("augment") && !j.at("augment").is_null()) {
        const json& a = j.at("augment");
        reject_unknown_keys(a, {"reflect", "translate_px", "scale_min", "scale_max"},
                            "train.augment");
        AugmentConfig aug;
        aug.reflect = get_or<bool>(a, "reflect", aug.reflect);
        aug.translate_px = get_or<int>(a, "translate_px", aug.translate_px);
        aug.scale_min = get_or<double>(a, "scale_min", aug.scale_min);
        aug.scale_max = get_or<double>(a, "scale_max", aug.scale_max);
        cfg.augmentation = aug;
    }
    return cfg;
}

}  // namespace

std::vector<LayerSpec> layer_specs_from_json(const json& j) {
    if (!j.is_array()) throw BadConfig("config: hd_layers must be an array");
    std::vector<LayerSpec> specs;
    for (const json& item : j) {
        const std::string type = get_or<std::string>(item, "type", "");
        if (type == "dense") {
            reject_unknown_keys(item, {"type", "out", "in"}, "hd_layers.dense");
            LayerSpec s = LayerSpec::dense(get_or<std::size_t>(item, "in", 0),
                                           get_or<std::size_t>(item, "out", 0));
            if (s.out == 0) throw BadConfig("config: dense layer needs out > 0");
            specs.push_back(s);
        } else if (type == "relu") {
            reject_unknown_keys(item, {"type"}, "hd_layers.relu");
            specs.push_back(LayerSpec::relu());
        } else if (type == "conv2d") {
            reject_unknown_keys(item, {"type", "out_ch", "in_ch", "pad"}, "hd_layers.conv2d");
            const std::string pad = get_or<std::string>(item, "pad", "same");
            if (pad != "same" && pad != "valid")
                throw BadConfig("config: conv2d pad must be 'same' or 'valid'");
            LayerSpec s = LayerSpec::conv2d(get_or<std::size_t>(item, "in_ch", 0),
                                            get_or<std::size_t>(item, "out_ch", 0),
                                            pad == "same" ? Padding::Same : Padding::Valid);
            if (s.out_ch == 0) throw BadConfig("config: conv2d layer needs out_ch > 0");
            specs.push_back(s);
        } else if (type == "maxpool2") {
            reject_unknown_keys(item, {"type"}, "hd_layers.maxpool2");
            specs.push_back(LayerSpec::maxpool2());
        } else if (type == "flatten") {
            reject_unknown_keys(item, {"type"}, "hd_layers.flatten");
            specs.push_back(LayerSpec::flatten());
        } else {
            throw BadConfig("config: unknown layer type '" + type + "'");
        }
    }
    return specs;
}

json layer_specs_to_json(const std::vector<LayerSpec>& specs) {
    json arr = json::array();
    for (const LayerSpec& s : specs) {
        json item;
        switch (s.kind) {
            case LayerSpec::Kind::Dense:
                item["type"] = "dense";
                item["in"] = s.in;
                item["out"] = s.out;
                break;
            case LayerSpec::Kind::Relu:
                item["type"] = "relu";
                break;
            case LayerSpec::Kind::Conv2d:
                item["type"] = "conv2d";
                item["in_ch"] = s.in_ch;
                item["out_ch"] = s.out_ch;
                item["pad"] = s.pad == Padding::Same ? "same" : "valid";
                break;
            case LayerSpec::Kind::MaxPool2:
                item["type"] = "maxpool2";
                break;
            case LayerSpec::Kind::Flatten:
                item["type"] = "flatten";
                break;
        }
        arr.push_back(item);
    }
    return arr;
}

RunConfig parse_run_config(const json& j) {
    if (!j.is_object()) throw BadConfig("config: top level must be a JSON object");
    reject_unknown_keys(j, {"seed", "output_dir", "standardize", "data", "split", "bdr",
                            "dnet", "train"}, "top level");
    RunConfig cfg;
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    cfg.output_dir = get_or<std::string>(j, "output_dir", "out");
    if (j.contains("standardize")) cfg.standardize = j.at("standardize").get<bool>();
    if (!j.contains("data")) throw BadConfig("config: missing 'data' section");
    cfg.data = parse_data(j.at("data"), "data");

    if (j.contains("split")) {
        const json& s = j.at("split");
        reject_unknown_keys(s, {"train", "val", "test", "seed"}, "split");
        cfg.split.train = get_or<double>(s, "train", cfg.split.train);
        cfg.split.val = get_or<double>(s, "val", cfg.split.val);
        cfg.split.test = get_or<double>(s, "test", cfg.split.test);
        if (s.contains("seed")) {
            cfg.split.seed = s.at("seed").get<std::uint64_t>();
            cfg.split_seed_set = true;
        }
    }
    if (j.contains("bdr")) cfg.bdr = parse_bdr(j.at("bdr"), cfg.bdr_seed_set);
    if (j.contains("train")) cfg.train = parse_train(j.at("train"), cfg.train_seed_set);

    if (j.contains("dnet")) {
        const json& d = j.at("dnet");
        reject_unknown_keys(d, {"hd_layers", "ld", "pca_r", "aggregation", "fusion_width",
                                "fusion_relu", "head", "classes", "regression_out",
                                "ld_standardize"}, "dnet");
        if (d.contains("hd_layers")) cfg.hd_layer_protos = layer_specs_from_json(d.at("hd_layers"));
        cfg.ld_kind = get_or<std::string>(d, "ld", cfg.ld_kind);
        if (cfg.ld_kind != "bdr" && cfg.ld_kind != "pca" && cfg.ld_kind != "none")
            throw BadConfig("config: dnet.ld must be bdr, pca or none");
        cfg.pca_r = get_or<std::size_t>(d, "pca_r", cfg.pca_r);
        const std::string agg = get_or<std::string>(d, "aggregation", "concat");
        if (agg == "concat")
            cfg.aggregation = Aggregation::Concat;
        else if (agg == "sum")
            cfg.aggregation = Aggregation::Sum;
        else
            throw BadConfig("config: dnet.aggregation must be concat or sum");
        cfg.fusion_width = get_or<std::size_t>(d, "fusion_width", cfg.fusion_width);
        cfg.fusion_relu = get_or<bool>(d, "fusion_relu", cfg.fusion_relu);
        const std::string head = get_or<std::string>(d, "head", "classification");
        if (head == "classification")
            cfg.head.kind = HeadSpec::Kind::Classification;
        else if (head == "regression")
            cfg.head.kind = HeadSpec::Kind::Regression;
        else
            throw BadConfig("config: dnet.head must be classification or regression");
        cfg.head.out = get_or<std::size_t>(d, head == "classification" ? "classes"
                                                                       : "regression_out",
                                           0);
        cfg.ld_standardize = get_or<bool>(d, "ld_standardize", cfg.ld_standardize);
    }

    // unset sub-seeds fall back to the global seed
    if (!cfg.split_seed_set) cfg.split.seed = cfg.seed;
    if (!cfg.bdr_seed_set) cfg.bdr.seed = cfg.seed;
    if (!cfg.train_seed_set) cfg.train.seed = cfg.seed;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw BadConfig("config: invalid JSON in " + path + ": " + e.what());
    }
    return parse_run_config(j);
}

json run_config_to_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    if (cfg.standardize) j["standardize"] = *cfg.standardize;

    json data;
    switch (cfg.data.kind) {
        case DataSpec::Kind::Blobs:
            data["type"] = "blobs";
            data["k"] = cfg.data.k;
            data["dim"] = cfg.data.dim;
            data["n_per_class"] = cfg.data.n_per_class;
            data["spread"] = cfg.data.spread;
            data["distractor_dims"] = cfg.data.distractor_dims;
            data["distractor_std"] = cfg.data.distractor_std;
            break;
        case DataSpec::Kind::Bars:
            data["type"] = "bars";
            data["size"] = cfg.data.size;
            data["n_per_class"] = cfg.data.n_per_class;
            break;
        case DataSpec::Kind::Lowrank:
            data["type"] = "lowrank";
            data["d"] = cfg.data.d;
            data["n"] = cfg.data.n;
            data["rank"] = cfg.data.rank;
            data["noise_std"] = cfg.data.noise_std;
            break;
        case DataSpec::Kind::Csv:
            data["type"] = "csv";
            data["path"] = cfg.data.path;
            data["label_column"] = cfg.data.label_column;
            break;
        case DataSpec::Kind::Images:
            data["type"] = "images";
            data["path"] = cfg.data.path;
            break;
    }
    if (cfg.data.seed) data["seed"] = *cfg.data.seed;
    j["data"] = data;

    j["split"] = {{"train", cfg.split.train},
                  {"val", cfg.split.val},
                  {"test", cfg.split.test},
                  {"seed", cfg.split.seed}};
    j["bdr"] = {{"r", cfg.bdr.r},
                {"prior", cfg.bdr.prior_mode == PriorMode::Ard ? "ard" : "elementwise"},
                {"sigma_z_sq", cfg.bdr.sigma_z_sq},
                {"alpha_phi", cfg.bdr.alpha_phi},
                {"beta_phi", cfg.bdr.beta_phi},
                {"max_iter", cfg.bdr.max_iter},
                {"tol", cfg.bdr.tol},
                {"seed", cfg.bdr.seed},
                {"center", cfg.bdr.center_data},
                {"prune_threshold", cfg.bdr.prune_threshold}};
    json dnet;
    dnet["hd_layers"] = layer_specs_to_json(cfg.hd_layer_protos);
    dnet["ld"] = cfg.ld_kind;
    dnet["pca_r"] = cfg.pca_r;
    dnet["aggregation"] = cfg.aggregation == Aggregation::Concat ? "concat" : "sum";
    dnet["fusion_width"] = cfg.fusion_width;
    dnet["fusion_relu"] = cfg.fusion_relu;
    dnet["head"] = cfg.head.kind == HeadSpec::Kind::Classification ? "classification"
                                                                   : "regression";
    if (cfg.head.kind == HeadSpec::Kind::Classification)
        dnet["classes"] = cfg.head.out;
    else
        dnet["regression_out"] = cfg.head.out;
    dnet["ld_standardize"] = cfg.ld_standardize;
    j["dnet"] = dnet;

    json train;
    train["batch_size"] = cfg.train.batch_size;
    train["max_epochs"] = cfg.train.max_epochs;
    train["patience"] = cfg.train.patience;
    train["lr"] = cfg.train.lr;
    train["seed"] = cfg.train.seed;
    train["shuffle_each_epoch"] = cfg.train.shuffle_each_epoch;
    if (cfg.train.augmentation) {
        train["augment"] = {{"reflect", cfg.train.augmentation->reflect},
                            {"translate_px", cfg.train.augmentation->translate_px},
                            {"scale_min", cfg.train.augmentation->scale_min},
                            {"scale_max", cfg.train.augmentation->scale_max}};
    }
    j["train"] = train;
    return j;
}

Dataset realize_dataset(const DataSpec& spec, std::uint64_t global_seed) {
    const std::uint64_t seed = spec.seed.value_or(global_seed);
    switch (spec.kind) {
        case DataSpec::Kind::Blobs: {
            SeededRng rng(seed);
            return make_blobs(rng, spec.k, spec.dim, spec.n_per_class, spec.spread,
                              spec.distractor_dims, spec.distractor_std);
        }
        case DataSpec::Kind::Bars: {
            SeededRng rng(seed);
            return make_bars(rng, spec.size, spec.n_per_class);
        }
        case DataSpec::Kind::Lowrank: {
            SeededRng rng(seed);
            return make_lowrank(rng, spec.d, spec.n, spec.rank, spec.noise_std).data;
        }
        case DataSpec::Kind::Csv:
            return load_csv(spec.path, spec.label_column);
        case DataSpec::Kind::Images: {
            // <stem>.dwlm with <stem>.labels.csv and optional <stem>.meta.json
            std::string stem = spec.path;
            if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".dwlm")
                stem = stem.substr(0, stem.size() - 5);
            Dataset ds;
            ds.x = read_dwlm(spec.path);
            ds.labels = read_labels_csv(stem + ".labels.csv");
            if (ds.labels.size() != ds.n())
                throw DimMismatch("images: label count differs from sample count");
            std::ifstream meta(stem + ".meta.json");
            if (meta) {
                json m;
                meta >> m;
                const auto shp = m.at("image_shape").get<std::vector<std::size_t>>();
                if (shp.size() != 3) throw BadConfig("images: image_shape must have 3 axes");
                ds.image_shape = {shp[0], shp[1], shp[2]};
                if (shp[0] * shp[1] * shp[2] != ds.dim())
                    throw DimMismatch("images: image_shape product differs from row count");
            }
            return ds;
        }
    }
    throw BadConfig("realize_dataset: unknown data kind");
}

std::vector<LayerSpec> resolve_hd_layers(const std::vector<LayerSpec>& protos,
                                         const std::vector<std::size_t>& input_shape) {
    std::vector<LayerSpec> specs = protos;
    std::vector<std::size_t> shape = input_shape;
    for (LayerSpec& s : specs) {
        if (s.kind == LayerSpec::Kind::Dense) {
            if (shape.size() != 2)
                throw BadConfig("hd_layers: dense layer reached with a non-flat shape");
            if (s.in == 0) s.in = shape[1];
        } else if (s.kind == LayerSpec::Kind::Conv2d) {
            if (shape.size() != 4)
                throw BadConfig("hd_layers: conv2d layer reached with a non-image shape");
            if (s.in_ch == 0) s.in_ch = shape[1];
        }
        shape = layer_output_shape(s, shape);
    }
    return specs;
}

std::vector<LayerSpec> default_hd_layers(const Dataset& data) {
    if (data.image_shape) {
        // one convolution block
        return {LayerSpec::conv2d(0, 8), LayerSpec::relu(), LayerSpec::maxpool2(),
                LayerSpec::flatten()};
    }
    LayerSpec dense = LayerSpec::dense(0, 16);
    return {dense, LayerSpec::relu()};
}

}  // namespace dwl

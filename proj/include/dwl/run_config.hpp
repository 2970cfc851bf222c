#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "dwl/datasets.hpp"
#include "dwl/dnet.hpp"

namespace dwl {

// Data source description: a seeded generator or a file path.
struct DataSpec {
    enum class Kind { Blobs, Bars, Lowrank, Csv, Images };
    Kind kind = Kind::Blobs;

    // blobs
    std::size_t k = 3, dim = 5, n_per_class = 100;
    double spread = 1.0;
    std::size_t distractor_dims = 0;
    double distractor_std = 1.0;
    // bars
    std::size_t size = 8;
    // lowrank
    std::size_t d = 20, n = 200, rank = 3;
    double noise_std = 0.01;
    std::optional<std::uint64_t> seed;  // defaults to the global seed
    // csv / images
    std::string path;
    std::string label_column = "label";
};

// Full experiment description, one JSON document. Unknown keys are rejected;
// flags override parsed values; the effective config is echoed to the output
// directory.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::optional<bool> standardize;  // default: on unless the data are images

    DataSpec data;

    SplitSpec split;
    bool split_seed_set = false;

    BdrConfig bdr;
    bool bdr_seed_set = false;

    // dnet section; dense/conv input widths resolve against the data shape
    std::vector<LayerSpec> hd_layer_protos;
    std::string ld_kind = "bdr";  // bdr | pca | none
    std::size_t pca_r = 8;
    Aggregation aggregation = Aggregation::Concat;
    std::size_t fusion_width = 16;
    bool fusion_relu = true;
    HeadSpec head{HeadSpec::Kind::Classification, 0};  // out 0: infer from labels
    bool ld_standardize = true;

    TrainConfig train;
    bool train_seed_set = false;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// Serializes the config back with every default filled in.
nlohmann::json run_config_to_json(const RunConfig& cfg);

// Generator/file dispatch. Seeds fall back to the global seed.
Dataset realize_dataset(const DataSpec& spec, std::uint64_t global_seed);

// Fills Dense `in` / Conv2d `in_ch` fields by walking the input shape.
std::vector<LayerSpec> resolve_hd_layers(const std::vector<LayerSpec>& protos,
                                         const std::vector<std::size_t>& input_shape);

// Default HD stack when the config gives none: a single dense+relu block for
// tabular data, one convolution block for images.
std::vector<LayerSpec> default_hd_layers(const Dataset& data);

nlohmann::json layer_specs_to_json(const std::vector<LayerSpec>& specs);
std::vector<LayerSpec> layer_specs_from_json(const nlohmann::json& j);

}  // namespace dwl

#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "dwl/bdr.hpp"
#include "dwl/datasets.hpp"
#include "dwl/dnet.hpp"

namespace dwl {

// On-disk model: a directory with manifest.json plus one DWLM matrix per
// named parameter block. load(save(m)) reproduces predictions bit-exactly.
struct ModelBundle {
    DNetModel model;
    std::optional<StandardizeStats> x_stats;  // input standardization, when used
    nlohmann::json metrics_summary;           // echoed into the manifest
};

void save_bundle(const ModelBundle& bundle, const std::string& dir);
ModelBundle load_bundle(const std::string& dir);

// Standalone fitted projector (bdr-fit command output).
void save_bdr_bundle(const BdrModel& model, const std::string& dir);
BdrModel load_bdr_bundle(const std::string& dir);

nlohmann::json bdr_config_to_json(const BdrConfig& cfg);
BdrConfig bdr_config_from_json(const nlohmann::json& j);

}  // namespace dwl

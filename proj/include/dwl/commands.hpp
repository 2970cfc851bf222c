#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dwl/run_config.hpp"

namespace dwl::cli {

// All commands throw dwl::Error subclasses; the entry point maps them to
// exit codes (2 config/validation, 3 I/O, 4 numerical).

void run_gen_data(const DataSpec& spec, std::uint64_t seed, const std::string& out_dir);

void run_bdr_fit(const std::string& data_path, const std::string& label_column,
                 const BdrConfig& cfg, const std::string& out_dir);

// Trains one arm per seed (seed, seed+1, ...); multi-seed runs write to
// per-seed subdirectories.
void run_train(RunConfig cfg, std::size_t n_seeds);

void run_eval(const std::string& model_dir, const std::string& data_path,
              const std::string& label_column, std::uint64_t seed,
              const std::string& out_dir);

void run_sweep(RunConfig cfg, const std::vector<std::size_t>& r_list, std::size_t n_seeds,
               const std::string& out_dir);

void run_export_features(const std::string& model_dir, const std::string& data_path,
                         const std::string& label_column, const std::string& layer,
                         const std::string& out_dir);

// Shared by commands and tests: dataset from a .csv or .dwlm path.
Dataset load_dataset_path(const std::string& path, const std::string& label_column);

}  // namespace dwl::cli

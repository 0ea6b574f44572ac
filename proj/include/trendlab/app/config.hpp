// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/models/spec.hpp"
#include "trendlab/segmentation.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace trendlab::app {

struct DatasetConfig {
    std::string path;
    std::string column = "0"; ///< header name or zero-based index
    std::string missing = "?";
    char delimiter = ',';
    bool header = false;

    friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct PartitionConfig {
    std::size_t splits = 1;
    std::size_t test = 1;
    std::size_t val = 0;
    std::size_t train = 1;

    friend bool operator==(const PartitionConfig&, const PartitionConfig&) = default;
};

struct ExperimentConfig {
    std::string preset; ///< informational; values below are authoritative
    DatasetConfig dataset;
    SegmentationConfig segmentation{1.0};
    FeatureMode feature_mode = FeatureMode::raw_only;
    std::size_t history_len = kDefaultHistoryLength;
    models::ModelSpec model;
    PartitionConfig partition;
    std::size_t runs = 10;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "machine"; ///< machine | human

    void validate() const;
    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Flat `key = value` text; `#` starts a comment line.
ExperimentConfig parse_config(std::string_view text);
std::string serialize(const ExperimentConfig& config);

/// parse_config over a file; errors carry the "config" stage.
ExperimentConfig load_config(const std::filesystem::path& path);

const std::vector<std::string>& preset_names();

/// Dataset preset: partition sizes and the named model's tuned hyperparameters.
ExperimentConfig make_preset(const std::string& name, models::ModelKind model);

/// Tuned hyperparameters for one model on one dataset preset.
models::ModelSpec preset_model(const std::string& name, models::ModelKind model);

} // namespace trendlab::app

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/segmentation.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace trendlab::models {

enum class ModelKind { lvm, mlp, lstm, cnn, trenet, rf, gbm };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

constexpr bool is_neural(ModelKind k) noexcept {
    return k == ModelKind::mlp || k == ModelKind::lstm || k == ModelKind::cnn || k == ModelKind::trenet;
}

enum class PoolKind { max, identity };

/// Neural architecture. `layers` holds hidden widths (mlp), cell counts
/// (lstm, and the single trenet recurrent layer), or filter counts (cnn).
struct NeuralArch {
    std::vector<std::size_t> layers;
    std::vector<std::size_t> filters; ///< trenet convolutional branch
    std::vector<std::size_t> kernels; ///< cnn and trenet kernel sizes, one per conv layer
    PoolKind pool = PoolKind::identity;
    std::size_t pool_size = 1;
    std::size_t fusion_width = 0;     ///< trenet projection width
    double dropout = 0.0;

    friend bool operator==(const NeuralArch&, const NeuralArch&) = default;
};

struct TreeArch {
    std::size_t n_estimators = 100;
    std::optional<std::size_t> max_depth;  ///< unset = grow until pure
    bool bootstrap = false;
    std::size_t max_samples = 0;           ///< bootstrap draw size; 0 = training-set size
    bool warm_start = false;               ///< rf: refits grow extra trees next to the old ones
    double learning_rate = 0.1;            ///< gbm
    std::size_t min_samples_leaf = 1;
    std::size_t max_leaves = 0;            ///< 0 = unlimited

    friend bool operator==(const TreeArch&, const TreeArch&) = default;
};

struct TrainSpec {
    std::size_t batch_size = 32;
    std::size_t epochs = 100;
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    double warm_start = 1.0; ///< fraction of `epochs` used by each warm-started update
    bool standardize = false;

    friend bool operator==(const TrainSpec&, const TrainSpec&) = default;
};

struct ModelSpec {
    ModelKind kind = ModelKind::lvm;
    NeuralArch net;
    TreeArch trees;
    TrainSpec train;

    /// Throws trendlab::Error on out-of-range hyperparameters.
    void validate() const;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Input geometry shared by every instance of a dataset.
struct InputDims {
    std::size_t feature_size = 0;
    std::size_t window = 0;
    std::size_t history_len = 0;

    static InputDims of(const Instance& instance);

    friend bool operator==(const InputDims&, const InputDims&) = default;
};

struct Prediction {
    double slope = 0.0;
    double duration = 0.0;

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

} // namespace trendlab::models

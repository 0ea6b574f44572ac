// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/models/spec.hpp"
#include "trendlab/nn/network.hpp"
#include "trendlab/random.hpp"

#include <span>
#include <vector>

namespace trendlab::models {

/// Per-column affine rescaling. Empty means identity. A row longer than the
/// column count is treated as consecutive records of `columns()` values.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    bool empty() const noexcept { return mean.empty(); }
    std::size_t columns() const noexcept { return mean.size(); }
    static Standardizer fit(std::span<const double> records, std::size_t columns);
    void apply(std::span<double> row) const;

    friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

struct NeuralModel {
    ModelSpec spec;
    InputDims dims;
    nn::Network network;
    Standardizer primary_scaler;
    Standardizer secondary_scaler;
};

struct FitResult {
    std::vector<double> loss_trace; ///< mean training joint loss per epoch
    std::size_t epochs = 0;
};

/// Builds and He-initialises the network for a neural spec.
nn::Network build_network(const ModelSpec& spec, const InputDims& dims, Seed seed);

NeuralModel make_neural_model(const ModelSpec& spec, const InputDims& dims, Seed seed);

/// Network input tensors for one instance, after any standardisation.
nn::NetInput make_net_input(const NeuralModel& model, const Instance& instance);

/// Trains for spec.train.epochs epochs starting from the current parameters.
FitResult fit(NeuralModel& model, std::span<const Instance> instances, Seed seed);

/// Continues from `model`'s parameters for ceil(omega * epochs) epochs under `spec`.
FitResult warm_start_fit(NeuralModel& model, std::span<const Instance> instances, const ModelSpec& spec,
                         Seed seed);

std::size_t warm_start_epochs(const TrainSpec& train);

FitResult train_epochs(NeuralModel& model, std::span<const Instance> instances, std::size_t epochs,
                       Seed seed);

Prediction predict(const NeuralModel& model, const Instance& instance);

/// Throws if the instance geometry differs from `dims`.
void check_dims(const InputDims& dims, const Instance& instance);

} // namespace trendlab::models

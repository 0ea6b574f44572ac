// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/models/spec.hpp"
#include "trendlab/random.hpp"

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace trendlab::models {

struct FitReport {
    std::size_t epochs = 0;         ///< neural epochs run; 0 for other kinds
    std::vector<double> loss_trace; ///< per epoch (neural) or per stage (gbm)
};

/// Uniform fit / update / predict contract over all seven model kinds.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual const ModelSpec& spec() const noexcept = 0;
    virtual const InputDims& dims() const noexcept = 0;

    /// Trains from scratch.
    virtual FitReport fit(std::span<const Instance> instances, Seed seed) = 0;

    /// Refit for the next walk-forward split. Neural models warm-start from
    /// their current weights for ceil(omega * epochs) epochs; a warm-start
    /// forest grows extra trees; other kinds refit from scratch.
    virtual FitReport update(std::span<const Instance> instances, Seed seed) = 0;

    virtual Prediction predict(const Instance& instance) const = 0;
    std::vector<Prediction> predict_batch(std::span<const Instance> instances) const;

    /// JSON text holding the spec, input dims and learned state.
    virtual std::string checkpoint() const = 0;
};

std::unique_ptr<Predictor> make_predictor(const ModelSpec& spec, const InputDims& dims);

std::unique_ptr<Predictor> load_predictor(const std::string& checkpoint_text);

void save_checkpoint(const Predictor& model, const std::filesystem::path& path);
std::unique_ptr<Predictor> load_checkpoint(const std::filesystem::path& path);

Prediction lvm_predict(const Instance& instance);

} // namespace trendlab::models

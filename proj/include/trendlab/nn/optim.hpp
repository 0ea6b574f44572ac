// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/nn/tensor.hpp"
#include "trendlab/random.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace trendlab::nn {

/// Fills `out` with i.i.d. Normal(0, 2 / fan_in) draws (He, fan-in mode).
void he_fill(std::span<double> out, std::size_t fan_in, Rng& rng);

/// He-initialised tensor of the given shape.
Tensor he_init(const Shape& shape, std::size_t fan_in, Seed seed);

struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    AdamState(std::size_t n_params, double learning_rate)
        : first_moment(n_params, 0.0), second_moment(n_params, 0.0), lr(learning_rate) {}
};

/// Bias-corrected Adam update, in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

/// Predictions and targets are (slope, duration) pairs.
using Pair = std::array<double, 2>;

struct LossResult {
    double loss = 0.0;
    std::vector<Pair> grad; ///< d loss / d prediction, per batch element
};

/// Equally weighted average of the slope MSE and the duration MSE.
LossResult joint_loss(std::span<const Pair> predictions, std::span<const Pair> targets);

} // namespace trendlab::nn

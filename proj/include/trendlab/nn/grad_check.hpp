// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/nn/network.hpp"

#include <vector>

namespace trendlab::nn {

struct GradCheckResult {
    double max_param_error = 0.0;
    double max_input_error = 0.0;
    std::size_t worst_param = 0;

    double max_error() const noexcept {
        return max_param_error > max_input_error ? max_param_error : max_input_error;
    }
};

/// Compares backprop against central finite differences on the scalar
/// loss 0.5 * ||output - r||^2, with r drawn from `seed`. Dropout is off.
/// Relative error is |a - n| / max(|a|, |n|, 1e-12).
GradCheckResult grad_check(const Network& net, const NetInput& input, Seed seed, double step = 1e-6);

/// Builds a single stack from `layers`, initialises it from `seed`, and checks it.
GradCheckResult grad_check(const std::vector<LayerSpec>& layers, const Tensor& input, Seed seed,
                           double step = 1e-6);

} // namespace trendlab::nn

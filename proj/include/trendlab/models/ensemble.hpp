// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/models/spec.hpp"
#include "trendlab/models/tree.hpp"
#include "trendlab/random.hpp"

#include <array>
#include <span>
#include <vector>

namespace trendlab::models {

TreeParams tree_params(const TreeArch& arch);

/// Random forest of two-output trees; prediction is the mean leaf vector.
struct Forest {
    std::vector<RegressionTree> trees;

    Prediction predict(std::span<const double> features) const;
    friend bool operator==(const Forest&, const Forest&) = default;
};

Forest rf_fit(std::span<const Instance> instances, const TreeArch& arch, Seed seed);

/// Appends arch.n_estimators trees fitted on `instances`; existing trees stay.
void rf_grow(Forest& forest, std::span<const Instance> instances, const TreeArch& arch, Seed seed);

/// Gradient boosting with squared loss, one additive ensemble per output.
struct Boosted {
    std::array<double, 2> base{0.0, 0.0};
    double learning_rate = 0.1;
    std::array<std::vector<RegressionTree>, 2> stages;
    std::vector<double> loss_trace; ///< training joint loss after each stage

    Prediction predict(std::span<const double> features) const;
    friend bool operator==(const Boosted&, const Boosted&) = default;
};

Boosted gbm_fit(std::span<const Instance> instances, const TreeArch& arch);

} // namespace trendlab::models

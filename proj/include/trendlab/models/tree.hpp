// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/segmentation.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace trendlab::models {

/// Row-major feature matrix.
struct FeatureMatrix {
    std::size_t n_rows = 0;
    std::size_t n_features = 0;
    std::vector<double> values;

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values).subspan(i * n_features, n_features);
    }
    static FeatureMatrix from_instances(std::span<const Instance> instances);
};

/// Row-major (slope, duration) targets of the instances.
std::vector<double> trend_targets(std::span<const Instance> instances);

struct TreeParams {
    std::optional<std::size_t> max_depth; ///< unset = unlimited
    std::size_t min_samples_leaf = 1;
    std::size_t max_leaves = 0;           ///< 0 = unlimited; otherwise grown best-first
};

struct TreeNode {
    int feature = -1; ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;    ///< rows with x[feature] <= threshold
    int right = -1;
    std::vector<double> value; ///< mean target of the node's rows
    std::size_t samples = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// CART regression tree with a vector-valued target. Splits minimise the summed
/// squared error over all outputs; thresholds sit at midpoints between
/// consecutive distinct values; ties go to the lowest feature, then the lowest
/// threshold.
class RegressionTree {
public:
    RegressionTree() = default;
    explicit RegressionTree(std::vector<TreeNode> nodes);

    /// `y` holds `n_outputs` values per matrix row. `rows` selects the training
    /// rows and may repeat them (bootstrap draws).
    static RegressionTree fit(const FeatureMatrix& x, std::span<const double> y, std::size_t n_outputs,
                              std::span<const std::size_t> rows, const TreeParams& params);
    static RegressionTree fit(const FeatureMatrix& x, std::span<const double> y, std::size_t n_outputs,
                              const TreeParams& params);

    std::span<const double> predict(std::span<const double> x) const;

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::size_t depth() const;
    std::size_t leaf_count() const;

    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
};

} // namespace trendlab::models

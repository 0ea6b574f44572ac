// SPDX-License-Identifier: Apache-2.0
#include "trendlab/models/ensemble.hpp"

#include "trendlab/error.hpp"

#include <numeric>
#include <random>

namespace trendlab::models {

TreeParams tree_params(const TreeArch& arch) {
    return TreeParams{arch.max_depth, arch.min_samples_leaf, arch.max_leaves};
}

Prediction Forest::predict(std::span<const double> features) const {
    if (trees.empty()) throw Error("forest is not fitted");
    double s = 0.0, d = 0.0;
    for (std::size_t i = 0; i < trees.size(); ++i) {
        const auto v = trees[i].predict(features);
        s += (v[0] - s) / static_cast<double>(i + 1);
        d += (v[1] - d) / static_cast<double>(i + 1);
    }
    return {s, d};
}

void rf_grow(Forest& forest, std::span<const Instance> instances, const TreeArch& arch, Seed seed) {
    if (instances.empty()) throw Error("no training instances");
    const auto x = FeatureMatrix::from_instances(instances);
    const auto y = trend_targets(instances);
    const auto params = tree_params(arch);
    std::vector<std::size_t> rows(x.n_rows);
    const std::size_t first = forest.trees.size();
    for (std::size_t t = 0; t < arch.n_estimators; ++t) {
        if (arch.bootstrap) {
            Rng rng = make_rng(derive(seed, first + t));
            const std::size_t draws = arch.max_samples > 0 ? arch.max_samples : x.n_rows;
            std::uniform_int_distribution<std::size_t> pick(0, x.n_rows - 1);
            rows.resize(draws);
            for (auto& r : rows) r = pick(rng);
        } else {
            rows.resize(x.n_rows);
            std::iota(rows.begin(), rows.end(), 0);
        }
        forest.trees.push_back(RegressionTree::fit(x, y, 2, rows, params));
    }
}

Forest rf_fit(std::span<const Instance> instances, const TreeArch& arch, Seed seed) {
    Forest f;
    rf_grow(f, instances, arch, seed);
    return f;
}

Prediction Boosted::predict(std::span<const double> features) const {
    std::array<double, 2> out = base;
    for (std::size_t k = 0; k < 2; ++k) {
        for (const auto& t : stages[k]) out[k] += learning_rate * t.predict(features)[0];
    }
    return {out[0], out[1]};
}

Boosted gbm_fit(std::span<const Instance> instances, const TreeArch& arch) {
    if (instances.empty()) throw Error("no training instances");
    const auto x = FeatureMatrix::from_instances(instances);
    const auto y = trend_targets(instances);
    const auto params = tree_params(arch);
    const std::size_t n = x.n_rows;

    Boosted model;
    model.learning_rate = arch.learning_rate;
    std::array<std::vector<double>, 2> fitted;
    for (std::size_t k = 0; k < 2; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += y[2 * i + k];
        model.base[k] = mean / static_cast<double>(n);
        fitted[k].assign(n, model.base[k]);
    }
    std::vector<double> residual(n);
    for (std::size_t stage = 0; stage < arch.n_estimators; ++stage) {
        double loss = 0.0;
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t i = 0; i < n; ++i) residual[i] = y[2 * i + k] - fitted[k][i];
            auto tree = RegressionTree::fit(x, residual, 1, params);
            for (std::size_t i = 0; i < n; ++i) {
                fitted[k][i] += model.learning_rate * tree.predict(x.row(i))[0];
                const double e = y[2 * i + k] - fitted[k][i];
                loss += 0.5 * e * e;
            }
            model.stages[k].push_back(std::move(tree));
        }
        model.loss_trace.push_back(loss / static_cast<double>(n));
    }
    return model;
}

} // namespace trendlab::models

// SPDX-License-Identifier: Apache-2.0
#include "trendlab/models/spec.hpp"

#include "trendlab/error.hpp"

#include <array>
#include <utility>

namespace trendlab::models {

namespace {

constexpr std::array<std::pair<ModelKind, const char*>, 7> kNames{{
    {ModelKind::lvm, "lvm"},
    {ModelKind::mlp, "mlp"},
    {ModelKind::lstm, "lstm"},
    {ModelKind::cnn, "cnn"},
    {ModelKind::trenet, "trenet"},
    {ModelKind::rf, "rf"},
    {ModelKind::gbm, "gbm"},
}};

void require(bool ok, const std::string& what) {
    if (!ok) throw Error("invalid model spec: " + what);
}

void require_positive(const std::vector<std::size_t>& v, const std::string& what) {
    for (std::size_t x : v) require(x > 0, what + " entries must be positive");
}

} // namespace

std::string to_string(ModelKind kind) {
    for (const auto& [k, name] : kNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
    for (const auto& [k, n] : kNames) {
        if (name == n) return k;
    }
    throw Error("unknown model '" + name + "' (expected lvm, mlp, lstm, cnn, trenet, rf or gbm)");
}

void ModelSpec::validate() const {
    require(train.warm_start >= 0.0 && train.warm_start <= 1.0, "warm-start fraction must lie in [0, 1]");
    if (is_neural(kind)) {
        require(train.batch_size > 0, "batch size must be positive");
        require(train.learning_rate > 0.0, "learning rate must be positive");
        require(train.weight_decay >= 0.0, "weight decay must be nonnegative");
        require(net.dropout >= 0.0 && net.dropout < 1.0, "dropout must lie in [0, 1)");
        require_positive(net.layers, "layers");
    }
    switch (kind) {
    case ModelKind::lvm:
        break;
    case ModelKind::mlp:
        require(net.layers.size() >= 1 && net.layers.size() <= 5, "mlp needs 1 to 5 layers");
        break;
    case ModelKind::lstm:
        require(net.layers.size() >= 1 && net.layers.size() <= 3, "lstm needs 1 to 3 layers");
        break;
    case ModelKind::cnn:
        require(net.layers.size() >= 1 && net.layers.size() <= 3, "cnn needs 1 to 3 conv layers");
        require(net.kernels.size() == net.layers.size(), "cnn needs one kernel size per conv layer");
        require_positive(net.kernels, "kernels");
        require(net.pool == PoolKind::identity || net.pool_size > 0, "pool size must be positive");
        break;
    case ModelKind::trenet:
        require(net.layers.size() == 1, "trenet has exactly one lstm layer");
        require(net.filters.size() == 2, "trenet has exactly two conv layers");
        require(net.kernels.size() == 2, "trenet needs two kernel sizes");
        require_positive(net.filters, "filters");
        require_positive(net.kernels, "kernels");
        require(net.fusion_width > 0, "fusion width must be positive");
        break;
    case ModelKind::rf:
    case ModelKind::gbm:
        require(trees.n_estimators > 0, "n_estimators must be positive");
        require(trees.min_samples_leaf > 0, "min_samples_leaf must be positive");
        require(trees.learning_rate >= 0.0, "learning rate must be nonnegative");
        break;
    }
}

InputDims InputDims::of(const Instance& instance) {
    return {instance.features.size(), instance.local_points.size(), instance.trend_history.size()};
}

} // namespace trendlab::models

// SPDX-License-Identifier: Apache-2.0
#include "trendlab/models/neural.hpp"

#include "trendlab/error.hpp"
#include "trendlab/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace trendlab::models {

using nn::LayerSpec;

namespace {

std::vector<LayerSpec> mlp_layers(const NeuralArch& a) {
    std::vector<LayerSpec> out;
    const std::size_t n = a.layers.size();
    for (std::size_t k = 1; k <= n; ++k) {
        out.push_back(LayerSpec::dense(a.layers[k - 1]));
        out.push_back(LayerSpec::relu());
        if (k % 2 == 1 && k < n) out.push_back(LayerSpec::dropout(a.dropout));
    }
    out.push_back(LayerSpec::dense(2));
    return out;
}

std::vector<LayerSpec> lstm_layers(const NeuralArch& a) {
    std::vector<LayerSpec> out;
    for (std::size_t k = 0; k < a.layers.size(); ++k) {
        out.push_back(LayerSpec::lstm(a.layers[k], k + 1 < a.layers.size()));
        out.push_back(LayerSpec::relu());
        out.push_back(LayerSpec::dropout(a.dropout));
    }
    out.push_back(LayerSpec::dense(2));
    return out;
}

std::vector<LayerSpec> cnn_layers(const NeuralArch& a) {
    std::vector<LayerSpec> out;
    for (std::size_t k = 0; k < a.layers.size(); ++k) {
        out.push_back(LayerSpec::conv1d(a.layers[k], a.kernels[k]));
        out.push_back(LayerSpec::relu());
        out.push_back(a.pool == PoolKind::max ? LayerSpec::maxpool(a.pool_size) : LayerSpec::identity_pool());
        out.push_back(LayerSpec::dropout(a.dropout));
    }
    out.push_back(LayerSpec::dense(2));
    return out;
}

std::shared_ptr<const nn::Architecture> make_architecture(const ModelSpec& spec, const InputDims& d) {
    const auto& a = spec.net;
    switch (spec.kind) {
    case ModelKind::mlp:
        return std::make_shared<nn::StackArchitecture>(mlp_layers(a), nn::Shape{d.feature_size}, "mlp");
    case ModelKind::lstm:
        return std::make_shared<nn::StackArchitecture>(lstm_layers(a), nn::Shape{d.feature_size, 1}, "lstm");
    case ModelKind::cnn:
        return std::make_shared<nn::StackArchitecture>(cnn_layers(a), nn::Shape{d.feature_size, 1}, "cnn");
    case ModelKind::trenet:
        return std::make_shared<nn::HybridArchitecture>(
            std::vector{LayerSpec::conv1d(a.filters[0], a.kernels[0]), LayerSpec::conv1d(a.filters[1], a.kernels[1]),
                        LayerSpec::relu(), LayerSpec::dense(a.fusion_width)},
            nn::Shape{d.window, 1}, std::vector{LayerSpec::lstm(a.layers[0]), LayerSpec::dense(a.fusion_width)},
            nn::Shape{d.history_len, 2}, std::vector{LayerSpec::dropout(a.dropout), LayerSpec::dense(2)});
    default:
        throw Error("model '" + to_string(spec.kind) + "' is not a neural network");
    }
}

std::vector<double> history_values(const Instance& inst) {
    std::vector<double> out;
    out.reserve(2 * inst.trend_history.size());
    for (const auto& t : inst.trend_history) {
        out.push_back(t.slope);
        out.push_back(static_cast<double>(t.duration));
    }
    return out;
}

const std::vector<double>& primary_values(ModelKind kind, const Instance& inst) {
    return kind == ModelKind::trenet ? inst.local_points : inst.features;
}

void fit_scalers(NeuralModel& model, std::span<const Instance> instances) {
    std::vector<double> primary, secondary;
    for (const auto& inst : instances) {
        const auto& p = primary_values(model.spec.kind, inst);
        primary.insert(primary.end(), p.begin(), p.end());
        if (model.spec.kind == ModelKind::trenet) {
            const auto h = history_values(inst);
            secondary.insert(secondary.end(), h.begin(), h.end());
        }
    }
    const std::size_t cols = model.spec.kind == ModelKind::trenet ? model.dims.window : model.dims.feature_size;
    model.primary_scaler = Standardizer::fit(primary, cols);
    if (model.spec.kind == ModelKind::trenet) model.secondary_scaler = Standardizer::fit(secondary, 2);
}

} // namespace

Standardizer Standardizer::fit(std::span<const double> records, std::size_t columns) {
    if (columns == 0 || records.empty() || records.size() % columns != 0) {
        throw Error("standardizer needs whole records of a positive column count");
    }
    Standardizer s;
    s.mean.assign(columns, 0.0);
    s.scale.assign(columns, 0.0);
    const double rows = static_cast<double>(records.size() / columns);
    for (std::size_t i = 0; i < records.size(); ++i) s.mean[i % columns] += records[i];
    for (double& m : s.mean) m /= rows;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double d = records[i] - s.mean[i % columns];
        s.scale[i % columns] += d * d;
    }
    for (double& v : s.scale) {
        const double sd = std::sqrt(v / rows);
        v = sd > 0.0 ? 1.0 / sd : 1.0;
    }
    return s;
}

void Standardizer::apply(std::span<double> row) const {
    if (empty()) return;
    for (std::size_t i = 0; i < row.size(); ++i) {
        const std::size_t c = i % columns();
        row[i] = (row[i] - mean[c]) * scale[c];
    }
}

nn::Network build_network(const ModelSpec& spec, const InputDims& dims, Seed seed) {
    spec.validate();
    if (!is_neural(spec.kind)) throw Error("model '" + to_string(spec.kind) + "' is not a neural network");
    nn::Network net(make_architecture(spec, dims));
    net.initialize(seed);
    return net;
}

NeuralModel make_neural_model(const ModelSpec& spec, const InputDims& dims, Seed seed) {
    return NeuralModel{spec, dims, build_network(spec, dims, seed), {}, {}};
}

void check_dims(const InputDims& dims, const Instance& instance) {
    const auto got = InputDims::of(instance);
    if (got != dims) {
        throw Error("instance dims (features " + std::to_string(got.feature_size) + ", window " +
                    std::to_string(got.window) + ", history " + std::to_string(got.history_len) +
                    ") do not match the model (features " + std::to_string(dims.feature_size) + ", window " +
                    std::to_string(dims.window) + ", history " + std::to_string(dims.history_len) + ")");
    }
}

nn::NetInput make_net_input(const NeuralModel& model, const Instance& instance) {
    check_dims(model.dims, instance);
    const auto& p = primary_values(model.spec.kind, instance);
    nn::NetInput in;
    if (model.spec.kind == ModelKind::mlp) {
        in.primary = nn::Tensor({p.size()}, p);
    } else {
        in.primary = nn::Tensor({p.size(), 1}, p);
    }
    model.primary_scaler.apply(in.primary.data);
    if (model.spec.kind == ModelKind::trenet) {
        in.secondary = nn::Tensor({model.dims.history_len, 2}, history_values(instance));
        model.secondary_scaler.apply(in.secondary.data);
    }
    return in;
}

FitResult train_epochs(NeuralModel& model, std::span<const Instance> instances, std::size_t epochs,
                       Seed seed) {
    FitResult result;
    if (instances.empty()) throw Error("no training instances");
    if (epochs == 0) return result;
    if (model.spec.train.standardize && model.primary_scaler.empty()) fit_scalers(model, instances);

    std::vector<nn::NetInput> inputs;
    inputs.reserve(instances.size());
    for (const auto& inst : instances) inputs.push_back(make_net_input(model, inst));

    const auto& train = model.spec.train;
    nn::Network& net = model.network;
    nn::AdamState adam(net.params().size(), train.learning_rate);
    nn::Gradients grads;
    Rng rng = make_rng(derive(seed, 1));
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    nn::NetCache cache;
    const nn::ForwardMode mode{true, &rng};

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += train.batch_size) {
            const std::size_t end = std::min(order.size(), start + train.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            grads.params.assign(net.params().size(), 0.0);
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t i = order[b];
                const auto out = net.forward(inputs[i], cache, mode);
                const double es = out[0] - instances[i].target.slope;
                const double ed = out[1] - static_cast<double>(instances[i].target.duration);
                total += 0.5 * (es * es + ed * ed);
                net.accumulate_gradients(cache, nn::Tensor::vector({es * inv_batch, ed * inv_batch}), grads);
            }
            if (train.weight_decay > 0.0) {
                const auto p = net.params();
                for (std::size_t k = 0; k < p.size(); ++k) grads.params[k] += train.weight_decay * p[k];
            }
            nn::adam_step(net.mutable_params(), grads.params, adam);
        }
        const double loss = total / static_cast<double>(order.size());
        if (!std::isfinite(loss)) {
            throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch));
        }
        result.loss_trace.push_back(loss);
        ++result.epochs;
    }
    return result;
}

FitResult fit(NeuralModel& model, std::span<const Instance> instances, Seed seed) {
    if (instances.empty()) throw Error("no training instances");
    return train_epochs(model, instances, model.spec.train.epochs, seed);
}

std::size_t warm_start_epochs(const TrainSpec& train) {
    return static_cast<std::size_t>(std::ceil(train.warm_start * static_cast<double>(train.epochs) - 1e-9));
}

FitResult warm_start_fit(NeuralModel& model, std::span<const Instance> instances, const ModelSpec& spec,
                         Seed seed) {
    if (spec.kind != model.spec.kind || spec.net != model.spec.net) {
        throw Error("warm start architecture mismatch: previous model is " + to_string(model.spec.kind) +
                    " with a different layout");
    }
    spec.validate();
    model.spec.train = spec.train;
    return train_epochs(model, instances, warm_start_epochs(spec.train), seed);
}

Prediction predict(const NeuralModel& model, const Instance& instance) {
    const auto out = model.network.predict(make_net_input(model, instance));
    return {out[0], out[1]};
}

} // namespace trendlab::models

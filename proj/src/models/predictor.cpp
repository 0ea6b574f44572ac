// SPDX-License-Identifier: Apache-2.0
#include "trendlab/models/predictor.hpp"

#include "trendlab/error.hpp"
#include "trendlab/file_io.hpp"
#include "trendlab/models/ensemble.hpp"
#include "trendlab/models/neural.hpp"

#include <json.hpp>

#include <optional>

namespace trendlab::models {

using nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

json spec_json(const ModelSpec& s) {
    json j;
    j["kind"] = to_string(s.kind);
    j["net"] = {{"layers", s.net.layers},
                {"filters", s.net.filters},
                {"kernels", s.net.kernels},
                {"pool", s.net.pool == PoolKind::max ? "max" : "identity"},
                {"pool_size", s.net.pool_size},
                {"fusion_width", s.net.fusion_width},
                {"dropout", s.net.dropout}};
    j["trees"] = {{"n_estimators", s.trees.n_estimators},
                  {"max_depth", s.trees.max_depth ? json(*s.trees.max_depth) : json(nullptr)},
                  {"bootstrap", s.trees.bootstrap},
                  {"max_samples", s.trees.max_samples},
                  {"warm_start", s.trees.warm_start},
                  {"learning_rate", s.trees.learning_rate},
                  {"min_samples_leaf", s.trees.min_samples_leaf},
                  {"max_leaves", s.trees.max_leaves}};
    j["train"] = {{"batch_size", s.train.batch_size},
                  {"epochs", s.train.epochs},
                  {"learning_rate", s.train.learning_rate},
                  {"weight_decay", s.train.weight_decay},
                  {"warm_start", s.train.warm_start},
                  {"standardize", s.train.standardize}};
    return j;
}

ModelSpec spec_from_json(const json& j) {
    ModelSpec s;
    s.kind = parse_model_kind(j.at("kind").get<std::string>());
    const auto& n = j.at("net");
    n.at("layers").get_to(s.net.layers);
    n.at("filters").get_to(s.net.filters);
    n.at("kernels").get_to(s.net.kernels);
    s.net.pool = n.at("pool").get<std::string>() == "max" ? PoolKind::max : PoolKind::identity;
    n.at("pool_size").get_to(s.net.pool_size);
    n.at("fusion_width").get_to(s.net.fusion_width);
    n.at("dropout").get_to(s.net.dropout);
    const auto& t = j.at("trees");
    t.at("n_estimators").get_to(s.trees.n_estimators);
    if (!t.at("max_depth").is_null()) s.trees.max_depth = t.at("max_depth").get<std::size_t>();
    t.at("bootstrap").get_to(s.trees.bootstrap);
    t.at("max_samples").get_to(s.trees.max_samples);
    t.at("warm_start").get_to(s.trees.warm_start);
    t.at("learning_rate").get_to(s.trees.learning_rate);
    t.at("min_samples_leaf").get_to(s.trees.min_samples_leaf);
    t.at("max_leaves").get_to(s.trees.max_leaves);
    const auto& r = j.at("train");
    r.at("batch_size").get_to(s.train.batch_size);
    r.at("epochs").get_to(s.train.epochs);
    r.at("learning_rate").get_to(s.train.learning_rate);
    r.at("weight_decay").get_to(s.train.weight_decay);
    r.at("warm_start").get_to(s.train.warm_start);
    r.at("standardize").get_to(s.train.standardize);
    return s;
}

json tree_json(const RegressionTree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes()) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.samples});
    }
    return nodes;
}

RegressionTree tree_from_json(const json& j) {
    std::vector<TreeNode> nodes;
    for (const auto& e : j) {
        TreeNode n;
        e.at(0).get_to(n.feature);
        e.at(1).get_to(n.threshold);
        e.at(2).get_to(n.left);
        e.at(3).get_to(n.right);
        e.at(4).get_to(n.value);
        e.at(5).get_to(n.samples);
        nodes.push_back(std::move(n));
    }
    return RegressionTree(std::move(nodes));
}

json scaler_json(const Standardizer& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }

Standardizer scaler_from_json(const json& j) {
    Standardizer s;
    j.at("mean").get_to(s.mean);
    j.at("scale").get_to(s.scale);
    return s;
}

class Base : public Predictor {
public:
    Base(ModelSpec spec, InputDims dims) : spec_(std::move(spec)), dims_(dims) { spec_.validate(); }
    const ModelSpec& spec() const noexcept override { return spec_; }
    const InputDims& dims() const noexcept override { return dims_; }

    std::string checkpoint() const override {
        json j;
        j["version"] = kCheckpointVersion;
        j["spec"] = spec_json(spec_);
        j["dims"] = {dims_.feature_size, dims_.window, dims_.history_len};
        j["state"] = state();
        return j.dump();
    }

    virtual json state() const = 0;
    virtual void restore(const json& state) = 0;

protected:
    void require_fitted(bool fitted) const {
        if (!fitted) throw Error(to_string(spec_.kind) + " model is not fitted");
    }

    ModelSpec spec_;
    InputDims dims_;
};

class LastValue final : public Base {
public:
    using Base::Base;
    FitReport fit(std::span<const Instance>, Seed) override { return {}; }
    FitReport update(std::span<const Instance>, Seed) override { return {}; }
    Prediction predict(const Instance& inst) const override {
        check_dims(dims_, inst);
        return lvm_predict(inst);
    }
    json state() const override { return json::object(); }
    void restore(const json&) override {}
};

class Neural final : public Base {
public:
    using Base::Base;

    FitReport fit(std::span<const Instance> instances, Seed seed) override {
        model_ = make_neural_model(spec_, dims_, derive(seed, 0x6e6574));
        const auto r = models::fit(*model_, instances, seed);
        return {r.epochs, r.loss_trace};
    }

    FitReport update(std::span<const Instance> instances, Seed seed) override {
        if (!model_) return fit(instances, seed);
        const auto r = warm_start_fit(*model_, instances, spec_, seed);
        return {r.epochs, r.loss_trace};
    }

    Prediction predict(const Instance& inst) const override {
        require_fitted(model_.has_value());
        return models::predict(*model_, inst);
    }

    json state() const override {
        if (!model_) return nullptr;
        const auto p = model_->network.params();
        return {{"params", std::vector<double>(p.begin(), p.end())},
                {"primary_scaler", scaler_json(model_->primary_scaler)},
                {"secondary_scaler", scaler_json(model_->secondary_scaler)}};
    }

    void restore(const json& state) override {
        if (state.is_null()) return;
        auto m = make_neural_model(spec_, dims_, Seed{0});
        m.network.set_params(state.at("params").get<std::vector<double>>());
        m.primary_scaler = scaler_from_json(state.at("primary_scaler"));
        m.secondary_scaler = scaler_from_json(state.at("secondary_scaler"));
        model_ = std::move(m);
    }

private:
    std::optional<NeuralModel> model_;
};

class RandomForest final : public Base {
public:
    using Base::Base;

    FitReport fit(std::span<const Instance> instances, Seed seed) override {
        check_all(instances);
        forest_ = rf_fit(instances, spec_.trees, seed);
        return {};
    }

    FitReport update(std::span<const Instance> instances, Seed seed) override {
        if (!spec_.trees.warm_start || forest_.trees.empty()) return fit(instances, seed);
        check_all(instances);
        rf_grow(forest_, instances, spec_.trees, seed);
        return {};
    }

    Prediction predict(const Instance& inst) const override {
        require_fitted(!forest_.trees.empty());
        check_dims(dims_, inst);
        return forest_.predict(inst.features);
    }

    json state() const override {
        json trees = json::array();
        for (const auto& t : forest_.trees) trees.push_back(tree_json(t));
        return {{"trees", trees}};
    }

    void restore(const json& state) override {
        forest_.trees.clear();
        for (const auto& t : state.at("trees")) forest_.trees.push_back(tree_from_json(t));
    }

private:
    void check_all(std::span<const Instance> instances) const {
        for (const auto& inst : instances) check_dims(dims_, inst);
    }

    Forest forest_;
};

class Boosting final : public Base {
public:
    using Base::Base;

    FitReport fit(std::span<const Instance> instances, Seed) override {
        for (const auto& inst : instances) check_dims(dims_, inst);
        model_ = gbm_fit(instances, spec_.trees);
        return {0, model_->loss_trace};
    }

    FitReport update(std::span<const Instance> instances, Seed seed) override { return fit(instances, seed); }

    Prediction predict(const Instance& inst) const override {
        require_fitted(model_.has_value());
        check_dims(dims_, inst);
        return model_->predict(inst.features);
    }

    json state() const override {
        if (!model_) return nullptr;
        json stages = json::array();
        for (const auto& per_output : model_->stages) {
            json trees = json::array();
            for (const auto& t : per_output) trees.push_back(tree_json(t));
            stages.push_back(trees);
        }
        return {{"base", model_->base}, {"learning_rate", model_->learning_rate}, {"stages", stages}};
    }

    void restore(const json& state) override {
        if (state.is_null()) return;
        Boosted b;
        state.at("base").get_to(b.base);
        state.at("learning_rate").get_to(b.learning_rate);
        const auto& stages = state.at("stages");
        if (stages.size() != 2) throw Error("boosting checkpoint needs two output ensembles");
        for (std::size_t k = 0; k < 2; ++k) {
            for (const auto& t : stages[k]) b.stages[k].push_back(tree_from_json(t));
        }
        model_ = std::move(b);
    }

private:
    std::optional<Boosted> model_;
};

std::unique_ptr<Base> make_base(const ModelSpec& spec, const InputDims& dims) {
    switch (spec.kind) {
    case ModelKind::lvm:
        return std::make_unique<LastValue>(spec, dims);
    case ModelKind::rf:
        return std::make_unique<RandomForest>(spec, dims);
    case ModelKind::gbm:
        return std::make_unique<Boosting>(spec, dims);
    default:
        return std::make_unique<Neural>(spec, dims);
    }
}

} // namespace

Prediction lvm_predict(const Instance& instance) {
    return {instance.current_trend.slope, static_cast<double>(instance.current_trend.duration)};
}

std::vector<Prediction> Predictor::predict_batch(std::span<const Instance> instances) const {
    std::vector<Prediction> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) out.push_back(predict(inst));
    return out;
}

std::unique_ptr<Predictor> make_predictor(const ModelSpec& spec, const InputDims& dims) {
    return make_base(spec, dims);
}

std::unique_ptr<Predictor> load_predictor(const std::string& checkpoint_text) {
    try {
        const auto j = json::parse(checkpoint_text);
        if (j.at("version").get<int>() != kCheckpointVersion) throw Error("unsupported checkpoint version");
        const auto& d = j.at("dims");
        const InputDims dims{d.at(0).get<std::size_t>(), d.at(1).get<std::size_t>(), d.at(2).get<std::size_t>()};
        auto model = make_base(spec_from_json(j.at("spec")), dims);
        model->restore(j.at("state"));
        return model;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const Predictor& model, const std::filesystem::path& path) {
    write_file_atomic(path, model.checkpoint());
}

std::unique_ptr<Predictor> load_checkpoint(const std::filesystem::path& path) {
    return load_predictor(read_file(path));
}

} // namespace trendlab::models

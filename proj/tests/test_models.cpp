// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "reference_cart.hpp"
#include "trendlab/error.hpp"
#include "trendlab/models/ensemble.hpp"
#include "trendlab/models/neural.hpp"
#include "trendlab/models/predictor.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>

using namespace trendlab;
using namespace trendlab::models;

namespace {

Instance make_instance(std::vector<double> features, Trend current, Trend target) {
    Instance inst;
    inst.local_points = features;
    inst.features = std::move(features);
    inst.current_trend = current;
    inst.trend_history = {current};
    inst.target = target;
    return inst;
}

// Instances whose targets are copies of two input features while the current
// trend is unrelated noise.
std::vector<Instance> copy_task(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> slope(-2.0, 2.0);
    std::uniform_int_distribution<std::size_t> dur(2, 6);
    std::vector<Instance> out;
    for (std::size_t i = 0; i < n; ++i) {
        const Trend target{slope(rng), dur(rng)};
        const Trend current{slope(rng) * 10.0, dur(rng) + 10};
        out.push_back(make_instance({target.slope, static_cast<double>(target.duration)}, current, target));
    }
    return out;
}

std::vector<Instance> trenet_instances(std::size_t n, std::size_t w, std::size_t h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> dur(2, 9);
    std::vector<Instance> out(n);
    for (auto& inst : out) {
        inst.local_points.resize(w);
        for (double& v : inst.local_points) v = g(rng);
        for (std::size_t k = 0; k < h; ++k) inst.trend_history.push_back({20.0 * g(rng), dur(rng)});
        inst.current_trend = inst.trend_history.back();
        inst.features = inst.local_points;
        inst.target = {g(rng), dur(rng)};
    }
    return out;
}

ModelSpec mlp_spec(std::vector<std::size_t> layers, std::size_t epochs, double lr = 1e-2) {
    ModelSpec s;
    s.kind = ModelKind::mlp;
    s.net.layers = std::move(layers);
    s.train.epochs = epochs;
    s.train.batch_size = 16;
    s.train.learning_rate = lr;
    return s;
}

ModelSpec trenet_spec(std::size_t cells, std::size_t filters, std::size_t fusion) {
    ModelSpec s;
    s.kind = ModelKind::trenet;
    s.net.layers = {cells};
    s.net.filters = {filters, filters};
    s.net.kernels = {3, 3};
    s.net.fusion_width = fusion;
    return s;
}

double joint(const Predictor& m, const std::vector<Instance>& data) {
    double total = 0.0;
    for (const auto& inst : data) {
        const auto p = m.predict(inst);
        const double es = p.slope - inst.target.slope;
        const double ed = p.duration - static_cast<double>(inst.target.duration);
        total += 0.5 * (es * es + ed * ed);
    }
    return total / static_cast<double>(data.size());
}

} // namespace

TEST_CASE("last value model echoes the current trend") {
    const auto inst = make_instance({1.0}, {12.0, 7}, {3.0, 4});
    CHECK(lvm_predict(inst) == Prediction{12.0, 7.0});
    CHECK(lvm_predict(inst) == lvm_predict(inst));

    // Five trends of durations 5, 6, 5, 6, 6: four instances, duration errors 1, -1, 1, 0.
    const std::vector<std::size_t> durations{5, 6, 5, 6, 6};
    double sq = 0.0;
    for (std::size_t k = 0; k + 1 < durations.size(); ++k) {
        const auto i = make_instance({0.0}, {0.0, durations[k]}, {0.0, durations[k + 1]});
        const double e = lvm_predict(i).duration - static_cast<double>(durations[k + 1]);
        sq += e * e;
    }
    CHECK(std::sqrt(sq / 4.0) == doctest::Approx(std::sqrt(3.0 / 4.0)));
}

TEST_CASE("spec validation enforces layer bounds") {
    CHECK_NOTHROW(mlp_spec({5, 5, 5, 5, 5}, 1).validate());
    CHECK_THROWS_AS(mlp_spec({5, 5, 5, 5, 5, 5}, 1).validate(), Error);
    CHECK_THROWS_AS(mlp_spec({}, 1).validate(), Error);
    ModelSpec lstm;
    lstm.kind = ModelKind::lstm;
    lstm.net.layers = {4, 4, 4, 4};
    CHECK_THROWS_AS(lstm.validate(), Error);
    ModelSpec cnn;
    cnn.kind = ModelKind::cnn;
    cnn.net.layers = {};
    CHECK_THROWS_AS(cnn.validate(), Error);
    auto omega = mlp_spec({3}, 1);
    omega.train.warm_start = 1.5;
    CHECK_THROWS_AS(omega.validate(), Error);
    CHECK(parse_model_kind("trenet") == ModelKind::trenet);
    CHECK_THROWS_AS(parse_model_kind("svr"), Error);
}

TEST_CASE("mlp dropout follows odd layers except the last") {
    const auto net = build_network(mlp_spec({8, 8, 8, 8, 8}, 1), {4, 4, 1}, Seed{1});
    const auto& specs = dynamic_cast<const nn::StackArchitecture&>(net.architecture()).stack().specs();
    std::vector<std::size_t> after;
    std::size_t dense_seen = 0;
    for (const auto& s : specs) {
        if (s.kind == nn::LayerKind::dense) ++dense_seen;
        if (s.kind == nn::LayerKind::dropout) after.push_back(dense_seen);
    }
    CHECK(after == std::vector<std::size_t>{1, 3});
    CHECK(specs.back().kind == nn::LayerKind::dense);
    CHECK(specs.back().units == 2);
}

TEST_CASE("mlp with one hidden width builds one hidden layer") {
    const auto net = build_network(mlp_spec({100}, 1), {2, 2, 1}, Seed{1});
    const auto& specs = dynamic_cast<const nn::StackArchitecture&>(net.architecture()).stack().specs();
    CHECK(std::count_if(specs.begin(), specs.end(), [](const auto& s) { return s.kind == nn::LayerKind::dense; }) ==
          2);
    CHECK(net.params().size() == (2 * 100 + 100) + (100 * 2 + 2));
}

TEST_CASE("lstm and cnn stacks") {
    ModelSpec lstm;
    lstm.kind = ModelKind::lstm;
    lstm.net.layers = {4, 3};
    lstm.net.dropout = 0.5;
    const auto a = build_network(lstm, {5, 5, 1}, Seed{2});
    const auto& ls = dynamic_cast<const nn::StackArchitecture&>(a.architecture()).stack().specs();
    REQUIRE(ls.size() == 7);
    CHECK(ls[0].return_sequences);
    CHECK_FALSE(ls[3].return_sequences);

    ModelSpec cnn;
    cnn.kind = ModelKind::cnn;
    cnn.net.layers = {4, 4};
    cnn.net.kernels = {2, 2};
    cnn.net.pool = PoolKind::max;
    cnn.net.pool_size = 2;
    const auto b = build_network(cnn, {10, 10, 1}, Seed{2});
    // 10 -> conv 9 -> pool 4 -> conv 3 -> pool 1, four filters, then dense(2)
    CHECK(b.architecture().output_shape() == nn::Shape{2});
    const auto& cs = dynamic_cast<const nn::StackArchitecture&>(b.architecture()).stack().specs();
    CHECK(cs[0].kind == nn::LayerKind::conv1d);
    CHECK(cs[1].kind == nn::LayerKind::relu);
    CHECK(cs[2].kind == nn::LayerKind::maxpool);
    CHECK(cs[3].kind == nn::LayerKind::dropout);
}

TEST_CASE("trenet voltage preset layout") {
    const auto net = build_network(trenet_spec(600, 16, 300), {19, 19, 8}, Seed{3});
    const auto& h = dynamic_cast<const nn::HybridArchitecture&>(net.architecture());
    CHECK(h.recurrent_branch().specs()[0].units == 600);
    CHECK(h.conv_branch().specs()[0].units == 16);
    CHECK(h.conv_branch().specs()[1].units == 16);
    CHECK(h.conv_branch().output_shape() == nn::Shape{300});
    CHECK(h.recurrent_branch().output_shape() == nn::Shape{300});
}

TEST_CASE("dense head on fusion width 10 has 22 parameters") {
    const auto net = build_network(trenet_spec(4, 3, 10), {6, 6, 3}, Seed{4});
    const auto& h = dynamic_cast<const nn::HybridArchitecture&>(net.architecture());
    CHECK(h.head().param_count() == 22);
}

TEST_CASE("trenet output ignores history once the recurrent projection is zeroed") {
    auto model = make_neural_model(trenet_spec(5, 3, 6), {7, 7, 4}, Seed{5});
    const auto& h = dynamic_cast<const nn::HybridArchitecture&>(model.network.architecture());
    const auto [offset, count] = h.recurrent_projection_range();
    auto p = model.network.mutable_params();
    std::fill(p.begin() + static_cast<std::ptrdiff_t>(offset), p.begin() + static_cast<std::ptrdiff_t>(offset + count),
              0.0);
    auto inst = trenet_instances(1, 7, 4, 6)[0];
    const auto before = predict(model, inst);
    std::reverse(inst.trend_history.begin(), inst.trend_history.end());
    std::swap(inst.trend_history[0], inst.trend_history[1]);
    CHECK(predict(model, inst) == before);

    auto intact = make_neural_model(trenet_spec(5, 3, 6), {7, 7, 4}, Seed{5});
    auto other = trenet_instances(1, 7, 4, 6)[0];
    const auto base = predict(intact, other);
    std::reverse(other.trend_history.begin(), other.trend_history.end());
    CHECK_FALSE(predict(intact, other) == base);
}

TEST_CASE("neural fit learns a copy task better than echoing the current trend") {
    const auto data = copy_task(200, 7);
    auto model = make_predictor(mlp_spec({16}, 150), InputDims::of(data[0]));
    const auto report = model->fit(data, Seed{8});
    CHECK(report.epochs == 150);
    CHECK(report.loss_trace.back() < report.loss_trace.front());
    auto lvm = make_predictor(ModelSpec{}, InputDims::of(data[0]));
    CHECK(joint(*model, data) < 0.1 * joint(*lvm, data));
}

TEST_CASE("neural fit is deterministic and zero epochs leave the network unchanged") {
    const auto data = copy_task(40, 9);
    const auto dims = InputDims::of(data[0]);
    auto spec = mlp_spec({6, 6}, 5);
    spec.net.dropout = 0.3;
    auto a = make_neural_model(spec, dims, Seed{1});
    auto b = make_neural_model(spec, dims, Seed{1});
    const auto ra = fit(a, data, Seed{2});
    const auto rb = fit(b, data, Seed{2});
    CHECK(ra.loss_trace == rb.loss_trace);
    CHECK(std::ranges::equal(a.network.params(), b.network.params()));

    spec.train.epochs = 0;
    auto c = make_neural_model(spec, dims, Seed{1});
    const std::vector<double> before(c.network.params().begin(), c.network.params().end());
    const auto rc = fit(c, data, Seed{2});
    CHECK(rc.loss_trace.empty());
    CHECK(std::ranges::equal(c.network.params(), before));
}

TEST_CASE("warm start epoch budget") {
    TrainSpec t;
    t.epochs = 100;
    t.warm_start = 0.2;
    CHECK(warm_start_epochs(t) == 20);
    t.warm_start = 1.0;
    CHECK(warm_start_epochs(t) == 100);
    t.warm_start = 0.0;
    CHECK(warm_start_epochs(t) == 0);
    t.epochs = 7;
    t.warm_start = 0.5;
    CHECK(warm_start_epochs(t) == 4);
}

TEST_CASE("warm start continues from previous weights") {
    const auto data = copy_task(30, 10);
    const auto dims = InputDims::of(data[0]);
    auto spec = mlp_spec({6}, 4);
    auto model = make_neural_model(spec, dims, Seed{1});
    fit(model, data, Seed{2});
    const std::vector<double> trained(model.network.params().begin(), model.network.params().end());

    spec.train.warm_start = 0.0;
    CHECK(warm_start_fit(model, data, spec, Seed{3}).epochs == 0);
    CHECK(std::ranges::equal(model.network.params(), trained));

    spec.train.warm_start = 1.0;
    CHECK(warm_start_fit(model, data, spec, Seed{3}).epochs == 4);

    auto wider = mlp_spec({7}, 4);
    CHECK_THROWS_AS(warm_start_fit(model, data, wider, Seed{3}), Error);
}

TEST_CASE("divergence reports the epoch") {
    const auto data = copy_task(20, 11);
    auto spec = mlp_spec({4}, 3, 1e300);
    spec.train.batch_size = 1;
    auto model = make_neural_model(spec, InputDims::of(data[0]), Seed{1});
    try {
        fit(model, data, Seed{1});
        FAIL("expected divergence");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("single-tree forest of depth zero predicts the target mean") {
    const std::vector<Instance> data{make_instance({0.0}, {}, {1.0, 2}), make_instance({1.0}, {}, {5.0, 6}),
                                     make_instance({2.0}, {}, {6.0, 10})};
    TreeArch arch;
    arch.n_estimators = 1;
    arch.max_depth = 0;
    const auto f = rf_fit(data, arch, Seed{1});
    for (double x : {-5.0, 0.5, 9.0}) CHECK(f.predict(std::vector{x}) == Prediction{4.0, 6.0});
}

TEST_CASE("pure targets give a constant forest") {
    std::vector<Instance> data;
    for (int i = 0; i < 10; ++i) data.push_back(make_instance({double(i), double(i * i)}, {}, {3.3, 4}));
    TreeArch arch;
    arch.n_estimators = 3;
    arch.bootstrap = true;
    const auto f = rf_fit(data, arch, Seed{2});
    for (const auto& t : f.trees) CHECK(t.leaf_count() == 1);
    CHECK(f.predict(std::vector{1.5, 7.0}) == Prediction{3.3, 4.0});
}

TEST_CASE("xor layout is fit exactly at depth two") {
    const std::vector<Instance> data{
        make_instance({0.0, 0.0}, {}, {0.0, 2}), make_instance({0.0, 1.0}, {}, {1.0, 3}),
        make_instance({1.0, 0.0}, {}, {1.0, 3}), make_instance({1.0, 1.0}, {}, {0.0, 2})};
    TreeArch arch;
    arch.n_estimators = 1;
    arch.max_depth = 2;
    const auto f = rf_fit(data, arch, Seed{1});
    for (const auto& inst : data) {
        CHECK(f.predict(inst.features) ==
              Prediction{inst.target.slope, static_cast<double>(inst.target.duration)});
    }
    CHECK(f.trees[0].depth() == 2);
}

TEST_CASE("single unbootstrapped tree matches the brute-force reference") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 19, d = 1 + rng() % 3;
        reference::Rows x(n, std::vector<double>(d)), y(n, std::vector<double>(2));
        std::vector<Instance> data;
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse grid values so repeated feature values occur.
            for (auto& v : x[i]) v = static_cast<double>(rng() % 6) * 0.5;
            y[i] = {static_cast<double>(rng() % 1000) / 10.0 - 50.0, static_cast<double>(2 + rng() % 15)};
            data.push_back(make_instance(x[i], {}, {y[i][0], static_cast<std::size_t>(y[i][1])}));
        }
        TreeArch arch;
        arch.n_estimators = 1;
        if (trial % 3 == 1) arch.max_depth = 1 + rng() % 3;
        if (trial % 4 == 2) arch.min_samples_leaf = 2;
        const auto forest = rf_fit(data, arch, Seed{static_cast<std::uint64_t>(trial)});
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        const auto ref = reference::grow(x, y, all, 0, arch.max_depth, arch.min_samples_leaf);
        for (int probe = 0; probe < 30; ++probe) {
            std::vector<double> q(d);
            for (auto& v : q) v = static_cast<double>(rng() % 14) * 0.25 - 0.25;
            const auto got = forest.predict(q);
            const auto& want = reference::predict(*ref, q);
            CHECK(got.slope == doctest::Approx(want[0]).epsilon(1e-12));
            CHECK(got.duration == doctest::Approx(want[1]).epsilon(1e-12));
        }
    }
}

TEST_CASE("leaf cap grows best-first") {
    std::vector<Instance> data;
    for (int i = 0; i < 40; ++i) data.push_back(make_instance({double(i)}, {}, {double(i * i % 17), 2}));
    TreeArch arch;
    arch.n_estimators = 1;
    arch.max_leaves = 5;
    const auto f = rf_fit(data, arch, Seed{1});
    CHECK(f.trees[0].leaf_count() == 5);
}

TEST_CASE("forest bootstrap is seeded and warm start keeps old trees") {
    std::vector<Instance> data;
    for (int i = 0; i < 30; ++i) data.push_back(make_instance({double(i % 7), double(i)}, {}, {double(i % 5), 2}));
    TreeArch arch;
    arch.n_estimators = 4;
    arch.bootstrap = true;
    arch.max_samples = 20;
    CHECK(rf_fit(data, arch, Seed{3}) == rf_fit(data, arch, Seed{3}));
    CHECK_FALSE(rf_fit(data, arch, Seed{3}) == rf_fit(data, arch, Seed{4}));

    ModelSpec spec;
    spec.kind = ModelKind::rf;
    spec.trees = arch;
    spec.trees.warm_start = true;
    auto model = make_predictor(spec, InputDims::of(data[0]));
    model->fit(data, Seed{1});
    model->update(data, Seed{2});
    const auto restored = load_predictor(model->checkpoint());
    CHECK(restored->checkpoint() == model->checkpoint());
    CHECK(nlohmann::json::parse(model->checkpoint())["state"]["trees"].size() == 8);
}

TEST_CASE("gbm with one full tree at rate one reproduces the targets") {
    std::vector<Instance> data;
    for (int i = 0; i < 6; ++i) data.push_back(make_instance({double(i)}, {}, {double(i * 7 % 5), std::size_t(2 + i)}));
    TreeArch arch;
    arch.n_estimators = 1;
    arch.learning_rate = 1.0;
    const auto m = gbm_fit(data, arch);
    for (const auto& inst : data) {
        const auto p = m.predict(inst.features);
        CHECK(p.slope == doctest::Approx(inst.target.slope));
        CHECK(p.duration == doctest::Approx(static_cast<double>(inst.target.duration)));
    }
}

TEST_CASE("gbm at rate zero is the mean predictor") {
    std::vector<Instance> data;
    for (int i = 0; i < 4; ++i) data.push_back(make_instance({double(i)}, {}, {double(i), 2}));
    TreeArch arch;
    arch.n_estimators = 5;
    arch.learning_rate = 0.0;
    const auto m = gbm_fit(data, arch);
    CHECK(m.predict(std::vector{0.0}) == Prediction{1.5, 2.0});
    CHECK(m.predict(std::vector{3.0}) == Prediction{1.5, 2.0});
}

TEST_CASE("gbm two stumps at rate one half") {
    // Slopes 1, 2, 6 at x = 0, 1, 2. Mean 3, residuals -2, -1, 3; the best stump
    // splits at 1.5 with leaf means -1.5 and 3, so F = 2.25, 2.25, 4.5. Residuals
    // -1.25, -0.25, 1.5 split at 1.5 again (means -0.75, 1.5): F = 1.875, 1.875, 5.25.
    const std::vector<Instance> data{make_instance({0.0}, {}, {1.0, 2}), make_instance({1.0}, {}, {2.0, 2}),
                                     make_instance({2.0}, {}, {6.0, 2})};
    TreeArch arch;
    arch.n_estimators = 2;
    arch.learning_rate = 0.5;
    arch.max_depth = 1;
    const auto m = gbm_fit(data, arch);
    CHECK(m.predict(std::vector{0.0}).slope == doctest::Approx(1.875));
    CHECK(m.predict(std::vector{1.0}).slope == doctest::Approx(1.875));
    CHECK(m.predict(std::vector{2.0}).slope == doctest::Approx(5.25));
    CHECK(m.predict(std::vector{2.0}).duration == 2.0);
}

TEST_CASE("gbm training loss never increases") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Instance> data;
    for (int i = 0; i < 60; ++i) {
        const double a = g(rng), b = g(rng);
        data.push_back(make_instance({a, b}, {}, {3 * a - b * b + 0.3 * g(rng), std::size_t(2 + (i % 4))}));
    }
    for (double lr : {0.1, 0.5, 1.0}) {
        TreeArch arch;
        arch.n_estimators = 20;
        arch.learning_rate = lr;
        arch.max_depth = 2;
        const auto m = gbm_fit(data, arch);
        for (std::size_t s = 1; s < m.loss_trace.size(); ++s) CHECK(m.loss_trace[s] <= m.loss_trace[s - 1]);
    }
}

TEST_CASE("predict_batch is order-preserving and pure") {
    const auto data = copy_task(5, 12);
    auto lvm = make_predictor(ModelSpec{}, InputDims::of(data[0]));
    CHECK(lvm->predict_batch(std::span<const Instance>{}).empty());
    const auto echoes = lvm->predict_batch(data);
    REQUIRE(echoes.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(echoes[i] == lvm_predict(data[i]));

    auto spec = mlp_spec({4, 4}, 2);
    spec.net.dropout = 0.5;
    auto mlp = make_predictor(spec, InputDims::of(data[0]));
    mlp->fit(data, Seed{1});
    CHECK(mlp->predict_batch(data) == mlp->predict_batch(data));

    auto wrong = data[0];
    wrong.features.push_back(1.0);
    CHECK_THROWS_AS(mlp->predict(wrong), Error);
}

TEST_CASE("checkpoints round-trip every model kind") {
    const auto flat = copy_task(30, 13);
    const auto seq = trenet_instances(20, 6, 3, 14);
    std::vector<std::pair<ModelSpec, const std::vector<Instance>*>> cases;
    cases.push_back({ModelSpec{}, &flat});
    auto mlp = mlp_spec({5}, 3);
    mlp.train.standardize = true;
    cases.push_back({mlp, &flat});
    ModelSpec lstm;
    lstm.kind = ModelKind::lstm;
    lstm.net.layers = {3};
    lstm.train.epochs = 2;
    cases.push_back({lstm, &flat});
    ModelSpec cnn;
    cnn.kind = ModelKind::cnn;
    cnn.net.layers = {3};
    cnn.net.kernels = {1};
    cnn.train.epochs = 2;
    cases.push_back({cnn, &flat});
    auto tre = trenet_spec(3, 2, 4);
    tre.train.epochs = 2;
    tre.train.standardize = true;
    cases.push_back({tre, &seq});
    ModelSpec rf;
    rf.kind = ModelKind::rf;
    rf.trees.n_estimators = 3;
    rf.trees.bootstrap = true;
    cases.push_back({rf, &flat});
    ModelSpec gbm;
    gbm.kind = ModelKind::gbm;
    gbm.trees.n_estimators = 3;
    gbm.trees.max_depth = 2;
    cases.push_back({gbm, &flat});

    const auto dir = std::filesystem::temp_directory_path() / "trendlab_ckpt_test";
    std::filesystem::create_directories(dir);
    for (const auto& [spec, data] : cases) {
        CAPTURE(to_string(spec.kind));
        auto model = make_predictor(spec, InputDims::of((*data)[0]));
        model->fit(*data, Seed{21});
        const auto path = dir / (to_string(spec.kind) + ".json");
        save_checkpoint(*model, path);
        const auto back = load_checkpoint(path);
        CHECK(back->spec() == spec);
        CHECK(back->predict_batch(*data) == model->predict_batch(*data));
    }
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(load_predictor("{\"version\": 1}"), Error);
}

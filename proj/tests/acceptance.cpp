// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.
#include "reference_cart.hpp"
#include "synthetic.hpp"
#include "trendlab/app/config.hpp"
#include "trendlab/app/experiment.hpp"
#include "trendlab/evaluation.hpp"
#include "trendlab/models/ensemble.hpp"
#include "trendlab/models/neural.hpp"
#include "trendlab/nn/grad_check.hpp"
#include "trendlab/segmentation.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace trendlab;
namespace ev = trendlab::evaluation;
using models::ModelKind;
using models::ModelSpec;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) detail << what;
        ok = ok && cond;
    }
};

// 1
void metric_reproduction(Check& c) {
    struct Row {
        double baseline, model, printed;
    };
    for (const auto& r : {Row{17.09, 9.25, 45.87}, Row{90.70, 23.06, 74.58}, Row{0.33, 1.23, -272.73}}) {
        const double got = ev::percent_improvement(r.model, r.baseline);
        c.expect(std::abs(got - r.printed) <= 0.01, "improvement " + std::to_string(got) + " vs printed " +
                                                        std::to_string(r.printed));
    }
}

// 2
void warm_start_arithmetic(Check& c) {
    const auto s = ev::warm_start_schedule(100, 8, 0.2);
    c.expect(std::abs(s.total_epochs - 240.0) < 1e-9, "E' != 240");
    c.expect(std::abs(s.speedup - 10.0 / 3.0) < 1e-9, "speedup != 3.3333");
    for (std::size_t S : {1u, 2u, 5u, 8u, 101u}) {
        c.expect(std::abs(ev::warm_start_schedule(50, S, 0.0).speedup - double(S)) < 1e-12, "omega=0 speedup != S");
        c.expect(std::abs(ev::warm_start_schedule(50, S, 1.0).speedup - 1.0) < 1e-12, "omega=1 speedup != 1");
    }
}

// 3
void partition_oracle(Check& c) {
    struct Col {
        const char* name;
        std::size_t n, s, tau, tau_v, rho;
    };
    for (const auto& col : {Col{"voltage", 42279, 8, 4227, 4227, 4227}, Col{"methane", 4418, 44, 10, 10, 3967},
                            Col{"nyse", 10014, 5, 1001, 1001, 4008}, Col{"jse", 1001, 101, 1, 1, 899}}) {
        const auto plan = ev::make_partitions(col.n, col.s, col.tau, col.tau_v, col.rho);
        const std::string tag = std::string(col.name) + ": ";
        c.expect(plan.splits.size() == col.s, tag + "split count");
        std::set<std::size_t> tested;
        for (std::size_t i = 0; i < plan.splits.size(); ++i) {
            const auto& sp = plan.splits[i];
            c.expect(sp.train.size() == col.rho && sp.val.size() == col.tau_v && sp.test.size() == col.tau,
                     tag + "range sizes");
            c.expect(sp.train.end == sp.val.begin && sp.val.end == sp.test.begin, tag + "not successive");
            c.expect(sp.test.begin == col.n - (col.s - i) * col.tau, tag + "test start");
            if (i > 0) c.expect(sp.train.begin == plan.splits[i - 1].train.begin + col.tau, tag + "advance");
            for (std::size_t k = sp.test.begin; k < sp.test.end; ++k) {
                c.expect(tested.insert(k).second, tag + "overlapping tests");
            }
            for (std::size_t j = 0; j <= i; ++j) {
                const auto& e = plan.splits[j];
                c.expect(e.train.end <= sp.test.begin && e.val.end <= sp.test.begin, tag + "look-ahead");
            }
        }
        c.expect(tested.size() == col.s * col.tau && *tested.rbegin() == col.n - 1, tag + "coverage");
    }
    const auto v = ev::make_partitions(42279, 8, 4227, 4227, 4227);
    c.expect(v.splits.back().test.end == 42279 && v.splits.front().test.begin == 42279 - 8 * 4227,
             "voltage tests do not cover the final 33816 instances");
}

nn::Tensor random_tensor(nn::Shape shape, std::uint64_t seed) {
    nn::Tensor t(std::move(shape));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (double& x : t.data) x = g(rng);
    return t;
}

// 4
void gradient_exactness(Check& c) {
    using nn::LayerSpec;
    const double tol = 1e-4;
    struct Case {
        const char* name;
        std::vector<LayerSpec> layers;
        nn::Shape input;
    };
    const std::vector<Case> stacks{
        {"dense", {LayerSpec::dense(4)}, {5}},
        {"conv1d", {LayerSpec::conv1d(3, 2)}, {7, 2}},
        {"lstm", {LayerSpec::lstm(3)}, {5, 2}},
        {"stacked lstm", {LayerSpec::lstm(3, true), LayerSpec::lstm(2)}, {4, 1}},
        {"dense relu", {LayerSpec::dense(6), LayerSpec::relu(), LayerSpec::dense(2)}, {3}},
        {"conv maxpool", {LayerSpec::conv1d(3, 2), LayerSpec::relu(), LayerSpec::maxpool(2), LayerSpec::dense(2)},
         {9, 1}},
        {"conv identity pool", {LayerSpec::conv1d(2, 3), LayerSpec::identity_pool(), LayerSpec::dense(2)}, {6, 1}},
    };
    for (const auto& k : stacks) {
        const auto r = nn::grad_check(k.layers, random_tensor(k.input, 3), Seed{5});
        c.expect(r.max_error() < tol, std::string(k.name) + " error " + std::to_string(r.max_error()));
    }

    const TimeSeries series(synthetic::sawtooth(400, 10, 6, 0.05, 1));
    const auto data = build_instances(series, segment_bottom_up(series, {0.05}), FeatureMode::raw_plus_trend, 4);
    const std::vector<Instance> train(data.begin(), data.begin() + 30);
    const models::InputDims dims = models::InputDims::of(data[0]);

    std::vector<std::pair<const char*, ModelSpec>> heads;
    auto head = [&](const char* name, ModelKind kind) -> ModelSpec& {
        ModelSpec s;
        s.kind = kind;
        s.net.dropout = 0.2;
        s.train.standardize = true;
        s.train.epochs = 1;
        s.train.batch_size = 8;
        return heads.emplace_back(name, s).second;
    };
    head("mlp", ModelKind::mlp).net.layers = {6, 5, 4};
    head("lstm", ModelKind::lstm).net.layers = {4, 3};
    auto& cnn = head("cnn", ModelKind::cnn);
    cnn.net.layers = {3, 2};
    cnn.net.kernels = {2, 2};
    cnn.net.pool = models::PoolKind::max;
    cnn.net.pool_size = 2;
    auto& trenet = head("trenet", ModelKind::trenet);
    trenet.net.layers = {4};
    trenet.net.filters = {3, 3};
    trenet.net.kernels = {2, 2};
    trenet.net.fusion_width = 5;

    // Fixed fixtures gate the criterion; the sweep only reports how often isolated
    // entries at the finite-difference noise floor or at a relu kink exceed the bound.
    std::size_t draws = 0, over = 0;
    for (const auto& [name, spec] : heads) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            auto model = models::make_neural_model(spec, dims, Seed{seed});
            models::fit(model, train, Seed{seed});
            for (std::size_t k : {30u, 31u, 40u}) {
                const auto r = nn::grad_check(model.network, models::make_net_input(model, data[k]), Seed{seed + k});
                c.expect(r.max_error() < tol, std::string(name) + " network error " + std::to_string(r.max_error()));
            }
        }
        for (std::uint64_t seed = 100; seed < 120; ++seed) {
            auto model = models::make_neural_model(spec, dims, Seed{seed});
            models::fit(model, train, Seed{seed});
            ++draws;
            over += nn::grad_check(model.network, models::make_net_input(model, data[35]), Seed{seed}).max_error() >= tol;
        }
    }
    c.detail << "sweep: " << over << " of " << draws << " random draws above the bound";
}

// Unsplittable segments of the finest partition: pairs, and the trailing triple of an odd length.
bool initial_segment(std::size_t start, std::size_t len, std::size_t n) {
    if (start % 2 != 0) return false;
    if (n % 2 == 1 && start + 3 == n) return len == 3;
    return len == 2;
}

// 5
void segmentation_properties(Check& c) {
    std::mt19937_64 rng(2718);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::vector<double> grid{0.0, 0.01, 0.05, 0.1, 0.3, 1.0, 3.0, 10.0, 1e9};
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng() % 63;
        std::vector<double> v(n);
        double level = 0.0;
        for (auto& x : v) x = (level += g(rng));
        const TimeSeries s(v);
        std::size_t previous = n;
        for (double e : grid) {
            const auto seq = segment_bottom_up(s, {e});
            std::size_t total = 0;
            for (std::size_t k = 0; k < seq.size(); ++k) {
                const auto& t = seq.trends[k];
                total += t.duration;
                c.expect(t.slope > -90.0 && t.slope < 90.0, "slope out of range");
                const double cost = fit_segment(s.values().subspan(seq.boundaries[k], t.duration)).cost;
                c.expect(cost <= e || initial_segment(seq.boundaries[k], t.duration, n),
                         "segment cost " + std::to_string(cost) + " above max_error " + std::to_string(e));
            }
            c.expect(total == n, "durations do not sum to the length");
            c.expect(seq.size() <= previous, "segment count grew with max_error");
            previous = seq.size();
        }
    }
    std::uniform_real_distribution<double> coef(-20.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 63;
        const double a = coef(rng), b = coef(rng);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = a * static_cast<double>(i) + b;
        const auto seq = segment_bottom_up(TimeSeries(v), {0.0});
        const double angle = std::atan(a) * 180.0 / std::numbers::pi;
        c.expect(seq.size() == 1 && std::abs(seq.trends[0].slope - angle) < 1e-9, "ramp not a single trend");
    }
}

std::vector<Instance> flat_instances(const reference::Rows& x, const reference::Rows& y) {
    std::vector<Instance> out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Instance inst;
        inst.features = x[i];
        inst.local_points = x[i];
        inst.target = {y[i][0], static_cast<std::size_t>(y[i][1])};
        out.push_back(inst);
    }
    return out;
}

// 6
void tree_oracles(Check& c) {
    std::mt19937_64 rng(31415);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng() % 20, d = 1 + rng() % 3;
        reference::Rows x(n, std::vector<double>(d)), y(n, std::vector<double>(2));
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : x[i]) v = trial % 2 ? static_cast<double>(rng() % 5) : std::ldexp(double(rng() % 4096), -6);
            y[i] = {static_cast<double>(rng() % 2001) / 20.0 - 50.0, static_cast<double>(2 + rng() % 30)};
        }
        models::TreeArch arch;
        arch.n_estimators = 1;
        if (trial % 3 == 0) arch.max_depth = rng() % 4;
        if (trial % 5 == 0) arch.min_samples_leaf = 1 + rng() % 3;
        const auto forest = models::rf_fit(flat_instances(x, y), arch, Seed{static_cast<std::uint64_t>(trial)});
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        const auto ref = reference::grow(x, y, all, 0, arch.max_depth, arch.min_samples_leaf);
        std::vector<std::vector<double>> probes = x;
        for (int p = 0; p < 20; ++p) {
            std::vector<double> q(d);
            for (auto& v : q) v = std::uniform_real_distribution<double>(-1.0, 70.0)(rng);
            probes.push_back(q);
        }
        for (const auto& q : probes) {
            const auto got = forest.predict(q);
            const auto& want = reference::predict(*ref, q);
            c.expect(std::abs(got.slope - want[0]) <= 1e-9 * std::max(1.0, std::abs(want[0])) &&
                         std::abs(got.duration - want[1]) <= 1e-9 * std::max(1.0, std::abs(want[1])),
                     "forest differs from the reference tree on trial " + std::to_string(trial));
        }
    }
    for (int trial = 0; trial < 30; ++trial) {
        reference::Rows x(40, std::vector<double>(3)), y(40, std::vector<double>(2));
        std::normal_distribution<double> g(0.0, 1.0);
        for (std::size_t i = 0; i < 40; ++i) {
            for (auto& v : x[i]) v = g(rng);
            y[i] = {5.0 * x[i][0] - x[i][1] * x[i][2] + g(rng), static_cast<double>(2 + rng() % 10)};
        }
        models::TreeArch arch;
        arch.n_estimators = 25;
        arch.learning_rate = 0.05 + 0.95 * static_cast<double>(trial) / 29.0;
        arch.max_depth = 1 + trial % 3;
        const auto m = models::gbm_fit(flat_instances(x, y), arch);
        for (std::size_t s = 1; s < m.loss_trace.size(); ++s) {
            c.expect(m.loss_trace[s] <= m.loss_trace[s - 1], "gbm loss increased");
        }
    }
}

std::vector<Instance> sawtooth_instances() {
    const TimeSeries s(synthetic::sawtooth(2000, 10, 6, 0.05, 1));
    return build_instances(s, segment_bottom_up(s, {0.05}), FeatureMode::raw_plus_trend);
}

ModelSpec sawtooth_mlp() {
    ModelSpec mlp;
    mlp.kind = ModelKind::mlp;
    mlp.net.layers = {32};
    mlp.train.epochs = 100;
    mlp.train.batch_size = 16;
    mlp.train.learning_rate = 1e-2;
    mlp.train.warm_start = 0.2;
    return mlp;
}

// 7
void end_to_end(Check& c) {
    const auto data = sawtooth_instances();
    const std::size_t S = 5;
    const auto plan = ev::make_partitions(data.size(), S, 20, 20, 100);
    const auto mlp = sawtooth_mlp();
    const auto m = ev::walk_forward_evaluate(mlp, data, plan, Seed{7});
    const auto lvm = ev::walk_forward_evaluate(ModelSpec{}, data, plan, Seed{7});
    c.detail << "mlp avg " << m.metrics.average << ", lvm avg " << lvm.metrics.average << "; ";
    c.expect(m.metrics.average <= 0.8 * lvm.metrics.average, "mlp not 20% below lvm");
    const double omega = mlp.train.warm_start;
    const double budget = static_cast<double>(S * mlp.train.epochs);
    const double ratio = static_cast<double>(m.total_epochs) / budget;
    c.detail << "epoch ratio " << ratio << " (bound " << (1.0 + (S - 1) * omega) / S << ")";
    c.expect(ratio <= (1.0 + static_cast<double>(S - 1) * omega) / static_cast<double>(S) + 1e-12,
             "; warm-start epochs over budget");
}

// 8
void stability(Check& c) {
    const auto data = sawtooth_instances();
    const auto plan = ev::make_partitions(data.size(), 5, 20, 20, 100);
    const auto lvm = ev::multi_run(ModelSpec{}, data, plan, 10, 0);
    c.expect(lvm.slope.std == 0.0 && lvm.duration.std == 0.0 && lvm.average.std == 0.0, "lvm std nonzero");

    auto mlp = sawtooth_mlp();
    mlp.train.epochs = 20;
    mlp.net.dropout = 0.1;
    const auto a = ev::multi_run(mlp, data, plan, 10, 100);
    const auto b = ev::multi_run(mlp, data, plan, 10, 100);
    bool identical = a.runs == b.runs && a.epochs == b.epochs && a.average == b.average;
    c.expect(identical, "multi_run not bit-identical on re-execution");

    for (const auto& [agg, pick] :
         {std::pair{a.slope, std::function<double(const ev::Metrics&)>([](auto& m) { return m.slope; })},
          std::pair{a.duration, std::function<double(const ev::Metrics&)>([](auto& m) { return m.duration; })},
          std::pair{a.average, std::function<double(const ev::Metrics&)>([](auto& m) { return m.average; })}}) {
        long double sum = 0.0L;
        for (const auto& r : a.runs) sum += pick(r);
        const long double mean = sum / a.runs.size();
        long double sq = 0.0L;
        for (const auto& r : a.runs) sq += (pick(r) - mean) * (pick(r) - mean);
        const double std = static_cast<double>(std::sqrt(sq / a.runs.size()));
        c.expect(std::abs(agg.mean - static_cast<double>(mean)) <= 1e-12 * std::max(1.0, std::abs(agg.mean)),
                 "mean disagrees with recomputation");
        c.expect(std::abs(agg.std - std) <= 1e-9 * std::max(1.0, agg.std), "std disagrees with recomputation");
    }

    app::ExperimentConfig cfg;
    cfg.segmentation.max_error = 0.05;
    cfg.feature_mode = FeatureMode::raw_plus_trend;
    cfg.model = mlp;
    cfg.partition = {5, 20, 20, 100};
    cfg.runs = 10;
    cfg.seed = 3;
    const TimeSeries s(synthetic::sawtooth(2000, 10, 6, 0.05, 1));
    const auto r1 = app::report_body(app::report_json(app::run_experiment(cfg, s)));
    const auto echoed = app::parse_config(nlohmann::json::parse(r1)["config"].get<std::string>());
    const auto r2 = app::report_body(app::report_json(app::run_experiment(echoed, s)));
    c.expect(r1 == r2, "report not reproducible from its config echo");
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, void (*)(Check&)>> criteria{
        {"1 metric reproduction", metric_reproduction},
        {"2 warm-start arithmetic", warm_start_arithmetic},
        {"3 partition-plan oracle", partition_oracle},
        {"4 gradient exactness", gradient_exactness},
        {"5 segmentation properties", segmentation_properties},
        {"6 tree-model oracles", tree_oracles},
        {"7 end-to-end desk-scale experiment", end_to_end},
        {"8 stability protocol", stability},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Check c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %s (%.2fs)%s%s\n", c.ok ? "PASS" : "FAIL", name, secs, c.detail.str().empty() ? "" : " ",
                    c.detail.str().c_str());
        failures += c.ok ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}

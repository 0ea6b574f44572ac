// SPDX-License-Identifier: Apache-2.0
#include "trendlab/evaluation.hpp"

#include "trendlab/error.hpp"
#include "trendlab/models/neural.hpp"

#include <cmath>

namespace trendlab::evaluation {

namespace {

std::span<const Instance> slice(std::span<const Instance> all, Range r) {
    return all.subspan(r.begin, r.size());
}

} // namespace

void PartitionPlan::validate() const {
    if (splits.empty()) throw Error("partition plan has no splits");
    for (std::size_t i = 0; i < splits.size(); ++i) {
        const auto& s = splits[i];
        if (s.train.size() != train_size || s.val.size() != val_size || s.test.size() != test_size) {
            throw Error("split " + std::to_string(i) + " has the wrong range sizes");
        }
        if (s.train.end != s.val.begin || s.val.end != s.test.begin) {
            throw Error("split " + std::to_string(i) + " is not successive");
        }
        if (s.test.end > n_instances) throw Error("split " + std::to_string(i) + " runs past the data");
        if (i > 0) {
            const auto& p = splits[i - 1];
            if (s.train.begin != p.train.begin + test_size || s.test.begin != p.test.end) {
                throw Error("split " + std::to_string(i) + " does not advance by the test size");
            }
        }
    }
    if (splits.back().test.end != n_instances) throw Error("final test range does not end at the last instance");
}

PartitionPlan make_partitions(std::size_t n_instances, std::size_t n_splits, std::size_t test_size,
                              std::size_t val_size, std::size_t train_size) {
    if (n_splits == 0 || test_size == 0 || train_size == 0) {
        throw Error("partition needs at least one split, one test and one training instance");
    }
    const std::size_t needed = train_size + val_size + n_splits * test_size;
    if (needed > n_instances) {
        throw Error("insufficient data: the partition needs at least " + std::to_string(needed) +
                    " instances, have " + std::to_string(n_instances));
    }
    PartitionPlan plan{n_instances, train_size, val_size, test_size, {}};
    for (std::size_t i = 0; i < n_splits; ++i) {
        const std::size_t test_begin = n_instances - (n_splits - i) * test_size;
        const std::size_t val_begin = test_begin - val_size;
        plan.splits.push_back({{val_begin - train_size, val_begin},
                               {val_begin, test_begin},
                               {test_begin, test_begin + test_size}});
    }
    plan.validate();
    return plan;
}

WarmStartSchedule warm_start_schedule(std::size_t epochs, std::size_t n_splits, double omega) {
    if (epochs == 0 || n_splits == 0) throw Error("warm-start schedule needs E >= 1 and S >= 1");
    if (!(omega >= 0.0 && omega <= 1.0)) throw Error("warm-start fraction must lie in [0, 1]");
    const double factor = 1.0 + static_cast<double>(n_splits - 1) * omega;
    WarmStartSchedule s;
    s.total_epochs = static_cast<double>(epochs) * factor;
    s.speedup = static_cast<double>(n_splits) / factor;
    models::TrainSpec t;
    t.epochs = epochs;
    t.warm_start = omega;
    s.epochs_per_split.assign(n_splits, models::warm_start_epochs(t));
    s.epochs_per_split[0] = epochs;
    return s;
}

double rmse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) throw Error("rmse needs equally long inputs");
    if (predictions.empty()) throw Error("rmse of an empty sequence");
    double sq = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double e = predictions[i] - targets[i];
        sq += e * e;
    }
    return std::sqrt(sq / static_cast<double>(predictions.size()));
}

double percent_improvement(double model_rmse, double baseline_rmse) {
    if (baseline_rmse == 0.0) throw Error("undefined improvement");
    return 100.0 * (baseline_rmse - model_rmse) / baseline_rmse;
}

Metrics trend_metrics(std::span<const models::Prediction> predictions, std::span<const Instance> instances) {
    if (predictions.size() != instances.size()) throw Error("prediction count does not match instances");
    std::vector<double> ps, ts, pd, td;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        ps.push_back(predictions[i].slope);
        ts.push_back(instances[i].target.slope);
        pd.push_back(predictions[i].duration);
        td.push_back(static_cast<double>(instances[i].target.duration));
    }
    Metrics m;
    m.slope = rmse(ps, ts);
    m.duration = rmse(pd, td);
    m.average = (m.slope + m.duration) / 2.0;
    return m;
}

WalkForwardResult walk_forward_evaluate(const models::ModelSpec& spec, std::span<const Instance> instances,
                                        const PartitionPlan& plan, Seed seed) {
    plan.validate();
    if (plan.n_instances != instances.size()) {
        throw Error("plan covers " + std::to_string(plan.n_instances) + " instances but " +
                    std::to_string(instances.size()) + " were given");
    }
    auto model = models::make_predictor(spec, models::InputDims::of(instances.front()));
    WalkForwardResult result;
    std::vector<models::Prediction> all_predictions;
    std::vector<Instance> all_targets;
    for (std::size_t i = 0; i < plan.splits.size(); ++i) {
        const Split& split = plan.splits[i];
        const Seed split_seed = derive(seed, i);
        const auto train = slice(instances, split.train);
        const auto report = i == 0 ? model->fit(train, split_seed) : model->update(train, split_seed);
        SplitResult sr;
        sr.split = split;
        sr.epochs = report.epochs;
        if (split.val.size() > 0) {
            const auto val = slice(instances, split.val);
            sr.validation = trend_metrics(model->predict_batch(val), val);
        }
        const auto test = slice(instances, split.test);
        sr.predictions = model->predict_batch(test);
        all_predictions.insert(all_predictions.end(), sr.predictions.begin(), sr.predictions.end());
        all_targets.insert(all_targets.end(), test.begin(), test.end());
        result.total_epochs += sr.epochs;
        result.splits.push_back(std::move(sr));
    }
    result.metrics = trend_metrics(all_predictions, all_targets);
    return result;
}

Aggregate aggregate(std::span<const double> values) {
    if (values.empty()) throw Error("cannot aggregate zero runs");
    Aggregate a;
    // Running mean, exact for identical values so their std is exactly zero.
    for (std::size_t i = 0; i < values.size(); ++i) a.mean += (values[i] - a.mean) / static_cast<double>(i + 1);
    double sq = 0.0;
    for (double v : values) sq += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(sq / static_cast<double>(values.size()));
    return a;
}

RunReport multi_run(const models::ModelSpec& spec, std::span<const Instance> instances, const PartitionPlan& plan,
                    std::size_t n_runs, std::uint64_t seed_base) {
    if (n_runs == 0) throw Error("multi_run needs at least one run");
    RunReport r;
    std::vector<double> s, d, a;
    for (std::size_t k = 0; k < n_runs; ++k) {
        const std::uint64_t seed = seed_base + k;
        const auto wf = walk_forward_evaluate(spec, instances, plan, Seed{seed});
        r.seeds.push_back(seed);
        r.runs.push_back(wf.metrics);
        r.epochs.push_back(wf.total_epochs);
        s.push_back(wf.metrics.slope);
        d.push_back(wf.metrics.duration);
        a.push_back(wf.metrics.average);
    }
    r.slope = aggregate(s);
    r.duration = aggregate(d);
    r.average = aggregate(a);
    return r;
}

} // namespace trendlab::evaluation

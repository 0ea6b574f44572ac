// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/models/predictor.hpp"
#include "trendlab/models/spec.hpp"
#include "trendlab/random.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace trendlab::evaluation {

/// Half-open index interval [begin, end).
struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const Range&, const Range&) = default;
};

struct Split {
    Range train;
    Range val;
    Range test;

    friend bool operator==(const Split&, const Split&) = default;
};

struct PartitionPlan {
    std::size_t n_instances = 0;
    std::size_t train_size = 0;
    std::size_t val_size = 0;
    std::size_t test_size = 0;
    std::vector<Split> splits;

    /// Throws unless the successive, overlapping, no-look-ahead layout holds.
    void validate() const;
};

/// S walk-forward splits; the last test range ends at the last instance.
PartitionPlan make_partitions(std::size_t n_instances, std::size_t n_splits, std::size_t test_size,
                              std::size_t val_size, std::size_t train_size);

struct WarmStartSchedule {
    double total_epochs = 0.0; ///< E * (1 + (S - 1) * omega)
    double speedup = 1.0;      ///< S / (1 + (S - 1) * omega)
    std::vector<std::size_t> epochs_per_split;
};

WarmStartSchedule warm_start_schedule(std::size_t epochs, std::size_t n_splits, double omega);

double rmse(std::span<const double> predictions, std::span<const double> targets);

/// 100 * (baseline - model) / baseline.
double percent_improvement(double model_rmse, double baseline_rmse);

struct Metrics {
    double slope = 0.0;
    double duration = 0.0;
    double average = 0.0;

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

Metrics trend_metrics(std::span<const models::Prediction> predictions, std::span<const Instance> instances);

struct SplitResult {
    Split split;
    std::vector<models::Prediction> predictions; ///< one per test instance
    std::size_t epochs = 0;
    Metrics validation; ///< monitoring only
};

struct WalkForwardResult {
    std::vector<SplitResult> splits;
    Metrics metrics; ///< over the concatenated test predictions
    std::size_t total_epochs = 0;
};

/// Cold fit on the first split's training range, warm updates afterwards.
WalkForwardResult walk_forward_evaluate(const models::ModelSpec& spec, std::span<const Instance> instances,
                                        const PartitionPlan& plan, Seed seed);

struct Aggregate {
    double mean = 0.0;
    double std = 0.0; ///< population

    friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

Aggregate aggregate(std::span<const double> values);

struct RunReport {
    std::vector<std::uint64_t> seeds;
    std::vector<Metrics> runs;
    std::vector<std::size_t> epochs; ///< total epochs per run
    Aggregate slope;
    Aggregate duration;
    Aggregate average;
};

/// Walk-forward runs under seeds seed_base, seed_base + 1, ...
RunReport multi_run(const models::ModelSpec& spec, std::span<const Instance> instances, const PartitionPlan& plan,
                    std::size_t n_runs, std::uint64_t seed_base);

} // namespace trendlab::evaluation

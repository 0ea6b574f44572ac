// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/app/config.hpp"
#include "trendlab/evaluation.hpp"
#include "trendlab/series.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace trendlab::app {

/// Imputed series, its trends and the derived instances.
struct PreparedData {
    TimeSeries series;
    TrendSequence trends;
    std::vector<Instance> instances;
    DatasetStats stats;
    std::size_t window = 0;
    std::size_t raw_feature_size = 0;
    std::size_t trend_feature_size = 0;
};

/// impute -> segment -> build instances. Errors carry the stage name.
PreparedData prepare(const ExperimentConfig& config, const TimeSeries& raw);

struct ExperimentResult {
    ExperimentConfig config;
    PreparedData data;
    evaluation::PartitionPlan plan;
    evaluation::RunReport model;
    evaluation::RunReport baseline;             ///< last value model
    std::optional<evaluation::Metrics> improvement; ///< unset when the baseline RMSE is zero
    std::optional<evaluation::WarmStartSchedule> schedule; ///< neural models only
    double seconds = 0.0;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const TimeSeries& raw);

/// Loads config.dataset first.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Machine report. Everything except the top-level "timing" key is a pure
/// function of the config and the data.
std::string report_json(const ExperimentResult& result);

/// Report without the timing key.
std::string report_body(const std::string& report_json_text);

/// Slope / Duration / Average table of a machine report.
std::string report_table(const std::string& report_json_text);

/// Percent improvement of the second report's model over the first's, per metric.
std::string compare_reports(const std::string& first_json, const std::string& second_json);

std::string stats_text(const PreparedData& data, bool machine);

/// Writes `<base>.series.csv` (index, raw, fitted) and `<base>.hist.csv` (bin left edge, count).
void emit_plot_data(const TimeSeries& series, const TrendSequence& trends, const std::filesystem::path& base,
                    std::size_t bins = 20);

} // namespace trendlab::app

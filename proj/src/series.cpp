// SPDX-License-Identifier: Apache-2.0
#include "trendlab/series.hpp"

#include "trendlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace trendlab {

TimeSeries::TimeSeries(std::vector<double> values)
    : values_(std::move(values)), missing_(values_.size(), 0) {}

TimeSeries::TimeSeries(std::vector<double> values, std::vector<std::uint8_t> missing,
                       std::optional<std::vector<double>> timestamps)
    : values_(std::move(values)), missing_(std::move(missing)), timestamps_(std::move(timestamps)) {
    if (missing_.size() != values_.size()) {
        throw Error("missing mask length " + std::to_string(missing_.size()) +
                    " does not match value count " + std::to_string(values_.size()));
    }
    if (timestamps_) {
        const auto& ts = *timestamps_;
        if (ts.size() != values_.size()) {
            throw Error("timestamp count does not match value count");
        }
        for (std::size_t i = 1; i < ts.size(); ++i) {
            if (!(ts[i] > ts[i - 1])) {
                throw Error("timestamps not strictly increasing at index " + std::to_string(i));
            }
        }
    }
}

std::size_t TimeSeries::missing_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(missing_.begin(), missing_.end(),
                                                  [](std::uint8_t m) { return m != 0; }));
}

void Trend::validate() const {
    if (!(slope > -90.0 && slope < 90.0)) {
        throw Error("trend slope " + std::to_string(slope) + " outside (-90, 90)");
    }
    if (duration < 2) {
        throw Error("trend duration must be at least 2");
    }
}

std::size_t TrendSequence::covered_points() const noexcept {
    std::size_t total = 0;
    for (const auto& t : trends) total += t.duration;
    return total;
}

void TrendSequence::validate(std::size_t n) const {
    if (trends.empty() || boundaries.size() != trends.size() || covered_points() != n ||
        boundaries.front() != 0) {
        throw Error("segmentation mismatch");
    }
    for (std::size_t k = 0; k < trends.size(); ++k) {
        trends[k].validate();
        if (k > 0 && boundaries[k] != boundaries[k - 1] + trends[k - 1].duration) {
            throw Error("segmentation mismatch");
        }
    }
}

TrendSequence TrendSequence::from_trends(std::vector<Trend> trends) {
    TrendSequence seq;
    seq.boundaries.reserve(trends.size());
    std::size_t start = 0;
    for (const auto& t : trends) {
        seq.boundaries.push_back(start);
        start += t.duration;
    }
    seq.trends = std::move(trends);
    return seq;
}

TimeSeries impute_missing(const TimeSeries& series) {
    const auto n = series.size();
    std::size_t first = 0;
    while (first < n && series.is_missing(first)) ++first;
    if (first == n) throw Error("no observed values");

    std::vector<double> out(n);
    double last = series[first];
    for (std::size_t i = 0; i < n; ++i) {
        if (!series.is_missing(i)) last = series[i];
        out[i] = last;
    }
    return TimeSeries(std::move(out), std::vector<std::uint8_t>(n, 0), series.timestamps());
}

namespace {

std::pair<double, double> population_mean_std(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / n)};
}

} // namespace

DatasetStats dataset_stats(const TimeSeries& series, const TrendSequence& trends) {
    trends.validate(series.size());

    std::vector<double> slopes, durations;
    slopes.reserve(trends.size());
    durations.reserve(trends.size());
    for (const auto& t : trends.trends) {
        slopes.push_back(t.slope);
        durations.push_back(static_cast<double>(t.duration));
    }

    DatasetStats stats;
    stats.n_points = series.size();
    stats.n_trends = trends.size();
    std::tie(stats.slope_mean, stats.slope_std) = population_mean_std(slopes);
    std::tie(stats.duration_mean, stats.duration_std) = population_mean_std(durations);
    stats.n_instances = trends.size() - 1;
    return stats;
}

} // namespace trendlab

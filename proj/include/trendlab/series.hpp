// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace trendlab {

/// Univariate, equally spaced series with an explicit missing-value mask.
/// Timestamps are carried along for provenance only; no algorithm reads them.
class TimeSeries {
public:
    TimeSeries() = default;

    /// Complete series (no missing values).
    explicit TimeSeries(std::vector<double> values);

    /// `missing[i] != 0` marks index i as absent; its entry in `values` is ignored.
    TimeSeries(std::vector<double> values, std::vector<std::uint8_t> missing,
               std::optional<std::vector<double>> timestamps = std::nullopt);

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool is_missing(std::size_t i) const { return missing_[i] != 0; }
    std::size_t missing_count() const noexcept;
    bool complete() const noexcept { return missing_count() == 0; }
    std::span<const std::uint8_t> missing_mask() const noexcept { return missing_; }

    const std::optional<std::vector<double>>& timestamps() const noexcept { return timestamps_; }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::vector<double> values_;
    std::vector<std::uint8_t> missing_;
    std::optional<std::vector<double>> timestamps_;
};

/// One piecewise-linear segment: slope angle in degrees, duration in points.
struct Trend {
    double slope = 0.0;
    std::size_t duration = 2;

    /// Throws unless slope is in (-90, 90) and duration >= 2.
    void validate() const;

    friend bool operator==(const Trend&, const Trend&) = default;
};

struct TrendSequence {
    std::vector<Trend> trends;
    std::vector<std::size_t> boundaries; ///< start index of each trend

    std::size_t size() const noexcept { return trends.size(); }
    std::size_t covered_points() const noexcept;

    /// Last index covered by trend k.
    std::size_t end_index(std::size_t k) const { return boundaries[k] + trends[k].duration - 1; }

    /// Throws "segmentation mismatch" unless the trends partition [0, n).
    void validate(std::size_t n) const;

    /// Rebuilds boundaries from durations.
    static TrendSequence from_trends(std::vector<Trend> trends);

    friend bool operator==(const TrendSequence&, const TrendSequence&) = default;
};

struct DatasetStats {
    std::size_t n_points = 0;
    std::size_t n_trends = 0;
    double slope_mean = 0.0;
    double slope_std = 0.0;
    double duration_mean = 0.0;
    double duration_std = 0.0;
    std::size_t n_instances = 0;
};

/// Replaces each missing value with the closest preceding observed value.
/// Leading gaps take the first observed value.
TimeSeries impute_missing(const TimeSeries& series);

/// Population statistics over a trend sequence consistent with `series`.
DatasetStats dataset_stats(const TimeSeries& series, const TrendSequence& trends);

} // namespace trendlab

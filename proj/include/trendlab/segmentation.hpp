// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/series.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace trendlab {

enum class CostKind { mean_squared_residual, sum_squared_residual };

struct SegmentationConfig {
    double max_error = 0.0;
    CostKind cost_kind = CostKind::mean_squared_residual;

    friend bool operator==(const SegmentationConfig&, const SegmentationConfig&) = default;
};

/// Ordinary least squares line over indices 0..n-1.
struct SegmentFit {
    double slope = 0.0;     ///< degrees
    double cost = 0.0;
    double intercept = 0.0; ///< fitted value at local index 0
    double coefficient = 0.0;
};

SegmentFit fit_segment(std::span<const double> points,
                       CostKind cost_kind = CostKind::mean_squared_residual);

/// Bottom-up piecewise linear segmentation.
///
/// Starts from adjacent point pairs (an odd-length series ends with one
/// three-point segment) and repeatedly merges the adjacent pair whose refit
/// cost is lowest, leftmost first on ties, while that cost <= max_error.
/// Segments never share points.
TrendSequence segment_bottom_up(const TimeSeries& series, const SegmentationConfig& cfg);

enum class FeatureMode { raw_only, raw_plus_trend };

/// One supervised example.
struct Instance {
    std::vector<double> local_points;  ///< window of w raw values ending at the current trend's end
    Trend current_trend;
    std::vector<Trend> trend_history;  ///< oldest first, current trend last
    Trend target;
    std::vector<double> features;      ///< flat vector per FeatureMode

    friend bool operator==(const Instance&, const Instance&) = default;
};

/// Flat feature vector length for a window of size w.
constexpr std::size_t feature_size(std::size_t window, FeatureMode mode) noexcept {
    return window + (mode == FeatureMode::raw_plus_trend ? 2 : 0);
}

inline constexpr std::size_t kDefaultHistoryLength = 8;

/// Sliding-window instances, one per trend except the last.
/// Window size w is the duration of the first trend.
std::vector<Instance> build_instances(const TimeSeries& series, const TrendSequence& trends,
                                      FeatureMode mode,
                                      std::size_t history_len = kDefaultHistoryLength);

} // namespace trendlab

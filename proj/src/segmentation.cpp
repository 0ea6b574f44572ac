// SPDX-License-Identifier: Apache-2.0
#include "trendlab/segmentation.hpp"

#include "trendlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

namespace trendlab {

SegmentFit fit_segment(std::span<const double> points, CostKind cost_kind) {
    const std::size_t n = points.size();
    if (n < 2) throw Error("degenerate segment");

    const double nd = static_cast<double>(n);
    const double x_mean = (nd - 1.0) / 2.0;
    double y_mean = 0.0;
    double scale = 0.0;
    for (double y : points) {
        y_mean += y;
        scale = std::max(scale, std::abs(y));
    }
    y_mean /= nd;

    // sum over i of (i - x_mean)^2 for i = 0..n-1
    const double sxx = nd * (nd * nd - 1.0) / 12.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (static_cast<double>(i) - x_mean) * (points[i] - y_mean);
    }

    SegmentFit fit;
    fit.coefficient = sxy / sxx;
    fit.intercept = y_mean - fit.coefficient * x_mean;

    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = points[i] - (fit.intercept + fit.coefficient * static_cast<double>(i));
        ssr += r * r;
    }
    // Residuals within a few dozen ulps of the data scale are rounding, not misfit.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    if (ssr <= nd * noise * noise) ssr = 0.0;
    fit.cost = cost_kind == CostKind::mean_squared_residual ? ssr / nd : ssr;

    double angle = std::atan(fit.coefficient) * 180.0 / std::numbers::pi;
    // atan of a huge coefficient rounds to exactly +-90
    angle = std::clamp(angle, std::nextafter(-90.0, 0.0), std::nextafter(90.0, 0.0));
    fit.slope = angle;
    return fit;
}

namespace {

struct MergeCandidate {
    double cost;
    std::size_t left_start; // tie-break: leftmost pair first
    std::size_t left;
    std::size_t right;
    std::uint64_t left_version;
    std::uint64_t right_version;

    bool operator>(const MergeCandidate& o) const {
        if (cost != o.cost) return cost > o.cost;
        return left_start > o.left_start;
    }
};

} // namespace

TrendSequence segment_bottom_up(const TimeSeries& series, const SegmentationConfig& cfg) {
    if (!series.complete()) throw Error("series has missing values; impute first");
    if (series.size() < 2) throw Error("degenerate segment");
    if (!(cfg.max_error >= 0.0)) throw Error("max_error must be nonnegative");

    const auto values = series.values();
    const std::size_t n = values.size();
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

    // Doubly linked list of live segments [begin, end).
    std::vector<std::size_t> begin, end, prev, next;
    std::vector<std::uint64_t> version;
    for (std::size_t s = 0; s + 1 < n; s += 2) {
        begin.push_back(s);
        end.push_back(s + 2);
    }
    if (n % 2 == 1) end.back() = n;
    const std::size_t count = begin.size();
    prev.resize(count);
    next.resize(count);
    version.assign(count, 0);
    for (std::size_t i = 0; i < count; ++i) {
        prev[i] = i == 0 ? none : i - 1;
        next[i] = i + 1 == count ? none : i + 1;
    }

    auto merged_cost = [&](std::size_t l, std::size_t r) {
        return fit_segment(values.subspan(begin[l], end[r] - begin[l]), cfg.cost_kind).cost;
    };

    std::priority_queue<MergeCandidate, std::vector<MergeCandidate>, std::greater<>> heap;
    auto push = [&](std::size_t l) {
        if (l == none || next[l] == none) return;
        const std::size_t r = next[l];
        heap.push({merged_cost(l, r), begin[l], l, r, version[l], version[r]});
    };
    for (std::size_t i = 0; i + 1 < count; ++i) push(i);

    while (!heap.empty()) {
        const MergeCandidate top = heap.top();
        if (top.cost > cfg.max_error) break;
        heap.pop();
        if (version[top.left] != top.left_version || version[top.right] != top.right_version ||
            next[top.left] != top.right) {
            continue;
        }
        const std::size_t l = top.left, r = top.right;
        end[l] = end[r];
        next[l] = next[r];
        if (next[r] != none) prev[next[r]] = l;
        ++version[l];
        ++version[r];
        next[r] = prev[r] = none;
        if (prev[l] != none) push(prev[l]);
        push(l);
    }

    std::vector<Trend> trends;
    for (std::size_t s = 0; s != none; s = next[s]) {
        const auto span = values.subspan(begin[s], end[s] - begin[s]);
        trends.push_back(Trend{fit_segment(span, cfg.cost_kind).slope, span.size()});
    }
    return TrendSequence::from_trends(std::move(trends));
}

std::vector<Instance> build_instances(const TimeSeries& series, const TrendSequence& trends,
                                      FeatureMode mode, std::size_t history_len) {
    trends.validate(series.size());
    if (trends.size() < 2) throw Error("nothing to predict");
    if (history_len == 0) throw Error("history length must be at least 1");

    const auto values = series.values();
    const std::size_t w = trends.trends.front().duration;

    std::vector<Instance> out;
    out.reserve(trends.size() - 1);
    for (std::size_t k = 0; k + 1 < trends.size(); ++k) {
        Instance inst;
        const std::size_t last = trends.end_index(k);
        inst.local_points.resize(w);
        for (std::size_t j = 0; j < w; ++j) {
            // position j of the window maps to series index last - (w - 1) + j
            const std::size_t offset = w - 1 - j;
            inst.local_points[j] = offset > last ? values[0] : values[last - offset];
        }
        inst.current_trend = trends.trends[k];
        inst.target = trends.trends[k + 1];

        const std::size_t first = k + 1 >= history_len ? k + 1 - history_len : 0;
        inst.trend_history.assign(history_len - (k + 1 - first), trends.trends[first]);
        inst.trend_history.insert(inst.trend_history.end(), trends.trends.begin() + first,
                                  trends.trends.begin() + k + 1);

        inst.features = inst.local_points;
        if (mode == FeatureMode::raw_plus_trend) {
            inst.features.push_back(inst.current_trend.slope);
            inst.features.push_back(static_cast<double>(inst.current_trend.duration));
        }
        out.push_back(std::move(inst));
    }
    return out;
}

} // namespace trendlab

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/app/config.hpp"
#include "trendlab/series.hpp"

#include <filesystem>
#include <string>

namespace trendlab::app {

/// Reads one column of a delimiter-separated file. Cells equal to the missing
/// token, or empty, become missing values; anything else must parse as a number.
TimeSeries load_csv(const std::filesystem::path& path, const DatasetConfig& options);

/// Same as load_csv over in-memory text; `source` names it in error messages.
TimeSeries parse_csv(const std::string& text, const DatasetConfig& options, const std::string& source = "input");

/// Trend table: header `start,duration,slope`, one row per trend.
std::string format_trend_table(const TrendSequence& trends);
TrendSequence parse_trend_table(const std::string& text);

} // namespace trendlab::app

// SPDX-License-Identifier: Apache-2.0
#include "trendlab/app/csv.hpp"

#include "trendlab/error.hpp"
#include "trendlab/file_io.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace trendlab::app {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, delim)) out.push_back(cell);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
    return s.substr(b);
}

bool parse_number(const std::string& s, double& out) {
    const char* b = s.data();
    if (!s.empty() && s[0] == '+') ++b;
    const auto r = std::from_chars(b, s.data() + s.size(), out);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

bool is_index(const std::string& s, std::size_t& out) {
    if (s.empty()) return false;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

} // namespace

TimeSeries parse_csv(const std::string& text, const DatasetConfig& options, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    std::size_t column = 0;
    bool column_known = is_index(options.column, column);
    if (options.header) {
        if (!std::getline(in, line)) throw Error(source + ": no data rows");
        ++row;
        const auto names = split(strip(line), options.delimiter);
        if (!column_known) {
            bool found = false;
            for (std::size_t i = 0; i < names.size() && !found; ++i) {
                if (strip(names[i]) == options.column) {
                    column = i;
                    found = true;
                }
            }
            if (!found) throw Error(source + ": no column named '" + options.column + "'");
            column_known = true;
        }
    }
    if (!column_known) throw Error(source + ": column '" + options.column + "' needs a header row or an index");

    std::vector<double> values;
    std::vector<std::uint8_t> missing;
    while (std::getline(in, line)) {
        ++row;
        if (strip(line).empty()) continue;
        const auto cells = split(line, options.delimiter);
        if (column >= cells.size()) {
            throw Error(source + " row " + std::to_string(row) + ": has " + std::to_string(cells.size()) +
                        " columns, column " + std::to_string(column) + " requested");
        }
        const std::string cell = strip(cells[column]);
        double v = 0.0;
        if (cell.empty() || cell == options.missing) {
            values.push_back(0.0);
            missing.push_back(1);
        } else if (parse_number(cell, v)) {
            values.push_back(v);
            missing.push_back(0);
        } else {
            throw Error(source + " row " + std::to_string(row) + ": cannot parse '" + cell + "' as a number");
        }
    }
    if (values.empty()) throw Error("no data rows");
    return TimeSeries(std::move(values), std::move(missing));
}

TimeSeries load_csv(const std::filesystem::path& path, const DatasetConfig& options) {
    return parse_csv(read_file(path), options, path.string());
}

std::string format_trend_table(const TrendSequence& trends) {
    std::string out = "start,duration,slope\n";
    char buf[96];
    for (std::size_t k = 0; k < trends.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g\n", trends.boundaries[k], trends.trends[k].duration,
                      trends.trends[k].slope);
        out += buf;
    }
    return out;
}

TrendSequence parse_trend_table(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || strip(line) != "start,duration,slope") {
        throw Error("trend table must start with the header start,duration,slope");
    }
    std::vector<Trend> trends;
    std::vector<std::size_t> starts;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (strip(line).empty()) continue;
        const auto cells = split(strip(line), ',');
        std::size_t start = 0, duration = 0;
        double slope = 0.0;
        if (cells.size() != 3 || !is_index(cells[0], start) || !is_index(cells[1], duration) ||
            !parse_number(cells[2], slope)) {
            throw Error("trend table row " + std::to_string(row) + ": expected start,duration,slope");
        }
        trends.push_back({slope, duration});
        starts.push_back(start);
    }
    auto seq = TrendSequence::from_trends(std::move(trends));
    if (seq.boundaries != starts) throw Error("trend table starts are not contiguous");
    return seq;
}

} // namespace trendlab::app

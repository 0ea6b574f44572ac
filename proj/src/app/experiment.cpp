// SPDX-License-Identifier: Apache-2.0
#include "trendlab/app/experiment.hpp"

#include "trendlab/app/csv.hpp"
#include "trendlab/error.hpp"
#include "trendlab/file_io.hpp"
#include "trendlab/segmentation.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

namespace trendlab::app {

using nlohmann::ordered_json;
namespace ev = trendlab::evaluation;

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

ordered_json run_json(const ev::RunReport& r, const std::string& name) {
    ordered_json runs = ordered_json::array();
    for (std::size_t i = 0; i < r.runs.size(); ++i) {
        runs.push_back({{"seed", r.seeds[i]},
                        {"slope", r.runs[i].slope},
                        {"duration", r.runs[i].duration},
                        {"average", r.runs[i].average},
                        {"epochs", r.epochs[i]}});
    }
    auto agg = [](const ev::Aggregate& a) { return ordered_json{{"mean", a.mean}, {"std", a.std}}; };
    return {{"name", name},
            {"slope", agg(r.slope)},
            {"duration", agg(r.duration)},
            {"average", agg(r.average)},
            {"runs", runs}};
}

std::string cell(const ordered_json& agg) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f ± %.4f", agg.at("mean").get<double>(), agg.at("std").get<double>());
    return buf;
}

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", v);
    return buf;
}

// Pads by code points so the multibyte plus-minus sign keeps columns aligned.
std::string pad(const std::string& s, std::size_t width) {
    const auto glyphs = static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char ch) { return (static_cast<unsigned char>(ch) & 0xC0) != 0x80; }));
    return s + std::string(glyphs < width ? width - glyphs : 1, ' ');
}

std::string row(const std::string& label, const std::string& a, const std::string& b, const std::string& c) {
    std::string out = pad(label, 13) + pad(a, 23) + pad(b, 23) + c;
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
}

ordered_json parse_report(const std::string& text) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed report: ") + e.what());
    }
}

} // namespace

PreparedData prepare(const ExperimentConfig& config, const TimeSeries& raw) {
    PreparedData d;
    d.series = stage("impute", [&] { return impute_missing(raw); });
    d.trends = stage("segment", [&] { return segment_bottom_up(d.series, config.segmentation); });
    d.instances = stage("instances", [&] {
        return build_instances(d.series, d.trends, config.feature_mode, config.history_len);
    });
    d.stats = dataset_stats(d.series, d.trends);
    d.window = d.trends.trends.front().duration;
    d.raw_feature_size = feature_size(d.window, FeatureMode::raw_only);
    d.trend_feature_size = feature_size(d.window, FeatureMode::raw_plus_trend);
    return d;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const TimeSeries& raw) {
    const auto t0 = std::chrono::steady_clock::now();
    stage("config", [&] {
        config.validate();
        return 0;
    });
    ExperimentResult r;
    r.config = config;
    r.data = prepare(config, raw);
    const auto& p = config.partition;
    r.plan = stage("partition", [&] {
        return ev::make_partitions(r.data.instances.size(), p.splits, p.test, p.val, p.train);
    });
    r.model = stage("train", [&] { return ev::multi_run(config.model, r.data.instances, r.plan, config.runs, config.seed); });
    r.baseline = config.model.kind == models::ModelKind::lvm
                     ? r.model
                     : stage("baseline", [&] {
                           return ev::multi_run(models::ModelSpec{}, r.data.instances, r.plan, config.runs, config.seed);
                       });
    try {
        r.improvement = ev::Metrics{ev::percent_improvement(r.model.slope.mean, r.baseline.slope.mean),
                                    ev::percent_improvement(r.model.duration.mean, r.baseline.duration.mean),
                                    ev::percent_improvement(r.model.average.mean, r.baseline.average.mean)};
    } catch (const Error&) {
        r.improvement.reset();
    }
    if (models::is_neural(config.model.kind)) {
        r.schedule = ev::warm_start_schedule(std::max<std::size_t>(config.model.train.epochs, 1), p.splits,
                                             config.model.train.warm_start);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const auto raw = stage("load", [&] { return load_csv(config.dataset.path, config.dataset); });
    return run_experiment(config, raw);
}

std::string report_json(const ExperimentResult& r) {
    ordered_json j;
    j["config"] = serialize(r.config);
    const auto& s = r.data.stats;
    j["dataset"] = {{"n_points", s.n_points},
                    {"n_trends", s.n_trends},
                    {"n_instances", s.n_instances},
                    {"slope_mean", s.slope_mean},
                    {"slope_std", s.slope_std},
                    {"duration_mean", s.duration_mean},
                    {"duration_std", s.duration_std},
                    {"window", r.data.window},
                    {"feature_size", r.data.instances.front().features.size()}};
    j["partition"] = {{"splits", r.plan.splits.size()},
                      {"test", r.plan.test_size},
                      {"val", r.plan.val_size},
                      {"train", r.plan.train_size},
                      {"first_test", r.plan.splits.front().test.begin}};
    j["model"] = run_json(r.model, models::to_string(r.config.model.kind));
    j["baseline"] = run_json(r.baseline, "lvm");
    if (r.improvement) {
        j["improvement"] = {{"slope", r.improvement->slope},
                            {"duration", r.improvement->duration},
                            {"average", r.improvement->average}};
    } else {
        j["improvement"] = nullptr;
    }
    if (r.schedule) {
        j["epochs"] = {{"per_split", r.schedule->epochs_per_split},
                       {"planned_total", r.schedule->total_epochs},
                       {"speedup", r.schedule->speedup}};
    }
    j["timing"] = {{"seconds", r.seconds}};
    return j.dump(2) + "\n";
}

std::string report_body(const std::string& text) {
    auto j = parse_report(text);
    j.erase("timing");
    return j.dump(2) + "\n";
}

std::string report_table(const std::string& text) {
    const auto j = parse_report(text);
    try {
        std::string out = row("", "Slope", "Duration", "Average");
        for (const char* key : {"baseline", "model"}) {
            const auto& m = j.at(key);
            out += row(m.at("name").get<std::string>(), cell(m.at("slope")), cell(m.at("duration")),
                       cell(m.at("average")));
        }
        const auto& imp = j.at("improvement");
        if (imp.is_null()) {
            out += row("improvement", "undefined", "undefined", "undefined");
        } else {
            out += row("improvement", percent(imp.at("slope").get<double>()), percent(imp.at("duration").get<double>()),
                       percent(imp.at("average").get<double>()));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("report is missing fields: ") + e.what());
    }
}

std::string compare_reports(const std::string& first_json, const std::string& second_json) {
    const auto a = parse_report(first_json), b = parse_report(second_json);
    try {
        const auto& ma = a.at("model");
        const auto& mb = b.at("model");
        std::string out = row("", "Slope", "Duration", "Average");
        out += row(ma.at("name").get<std::string>(), cell(ma.at("slope")), cell(ma.at("duration")),
                   cell(ma.at("average")));
        out += row(mb.at("name").get<std::string>(), cell(mb.at("slope")), cell(mb.at("duration")),
                   cell(mb.at("average")));
        std::string imp[3];
        const char* keys[] = {"slope", "duration", "average"};
        for (int i = 0; i < 3; ++i) {
            const double base = ma.at(keys[i]).at("mean").get<double>();
            const double model = mb.at(keys[i]).at("mean").get<double>();
            imp[i] = base == 0.0 ? "undefined" : percent(ev::percent_improvement(model, base));
        }
        out += row("improvement", imp[0], imp[1], imp[2]);
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("report is missing fields: ") + e.what());
    }
}

std::string stats_text(const PreparedData& d, bool machine) {
    const auto& s = d.stats;
    if (machine) {
        ordered_json j{{"n_points", s.n_points},
                       {"n_trends", s.n_trends},
                       {"slope_mean", s.slope_mean},
                       {"slope_std", s.slope_std},
                       {"duration_mean", s.duration_mean},
                       {"duration_std", s.duration_std},
                       {"raw_feature_size", d.raw_feature_size},
                       {"trend_feature_size", d.trend_feature_size},
                       {"n_instances", s.n_instances}};
        return j.dump(2) + "\n";
    }
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "n_points=%zu\nn_trends=%zu\nslope=%.2f ± %.2f\nduration=%.2f ± %.2f\n"
                  "raw_feature_size=%zu\ntrend_feature_size=%zu\nn_instances=%zu\n",
                  s.n_points, s.n_trends, s.slope_mean, s.slope_std, s.duration_mean, s.duration_std,
                  d.raw_feature_size, d.trend_feature_size, s.n_instances);
    return buf;
}

void emit_plot_data(const TimeSeries& series, const TrendSequence& trends, const std::filesystem::path& base,
                    std::size_t bins) {
    trends.validate(series.size());
    if (bins == 0) throw Error("histogram needs at least one bin");
    const auto v = series.values();
    std::string table = "index,raw,fitted\n";
    char buf[128];
    for (std::size_t k = 0; k < trends.size(); ++k) {
        const std::size_t start = trends.boundaries[k], len = trends.trends[k].duration;
        const auto fit = fit_segment(v.subspan(start, len));
        for (std::size_t i = 0; i < len; ++i) {
            const double fitted = fit.intercept + fit.coefficient * static_cast<double>(i);
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", start + i, v[start + i], fitted);
            table += buf;
        }
    }
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double lo = *lo_it, hi = *hi_it;
    const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
    std::vector<std::size_t> counts(bins, 0);
    for (double x : v) {
        const auto b = static_cast<std::size_t>((x - lo) / width);
        ++counts[std::min(b, bins - 1)];
    }
    std::string hist = "left_edge,count\n";
    for (std::size_t b = 0; b < bins; ++b) {
        std::snprintf(buf, sizeof buf, "%.17g,%zu\n", lo + width * static_cast<double>(b), counts[b]);
        hist += buf;
    }
    auto series_path = base;
    series_path += ".series.csv";
    auto hist_path = base;
    hist_path += ".hist.csv";
    write_file_atomic(series_path, table);
    write_file_atomic(hist_path, hist);
}

} // namespace trendlab::app

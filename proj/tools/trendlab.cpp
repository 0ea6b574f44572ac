// SPDX-License-Identifier: Apache-2.0
// trendlab command line: segment, stats, run, report.
#include "trendlab/app/config.hpp"
#include "trendlab/app/csv.hpp"
#include "trendlab/app/experiment.hpp"
#include "trendlab/error.hpp"
#include "trendlab/file_io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace trendlab;
using namespace trendlab::app;

namespace {

struct Options {
    std::string config;
    std::string preset;
    std::string model;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::string out;
    std::string format;
    std::string data;
    std::string column;
    std::string delimiter;
    std::string missing;
    bool header = false;
    std::optional<double> max_error;
    std::string plot;
    std::vector<std::string> reports;
};

void add_dataset_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "Experiment config file");
    cmd->add_option("--preset", o.preset, "Dataset preset: voltage, methane, nyse or jse");
    cmd->add_option("--data", o.data, "Delimiter-separated input file");
    cmd->add_option("--column", o.column, "Value column: header name or zero-based index");
    cmd->add_option("--delimiter", o.delimiter, "Cell delimiter (one character or 'tab')");
    cmd->add_option("--missing", o.missing, "Missing-value token");
    cmd->add_flag("--header", o.header, "First row is a header");
    cmd->add_option("--max-error", o.max_error, "Segmentation merge threshold");
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"human", "machine"}));
    cmd->add_option("--out", o.out, "Output path (run: the JSON report file)");
}

ExperimentConfig resolve(const Options& o) {
    ExperimentConfig c;
    if (!o.config.empty()) c = load_config(o.config);
    if (!o.preset.empty()) {
        const auto kind = models::parse_model_kind(o.model.empty() ? models::to_string(c.model.kind) : o.model);
        auto p = make_preset(o.preset, kind);
        p.dataset = c.dataset;
        p.segmentation = c.segmentation;
        p.feature_mode = c.feature_mode;
        p.history_len = c.history_len;
        p.runs = c.runs;
        p.seed = c.seed;
        p.out = c.out;
        p.format = c.format;
        c = p;
    } else if (!o.model.empty()) {
        c.model.kind = models::parse_model_kind(o.model);
    }
    if (!o.data.empty()) c.dataset.path = o.data;
    if (!o.column.empty()) c.dataset.column = o.column;
    if (!o.delimiter.empty()) c.dataset.delimiter = o.delimiter == "tab" ? '\t' : o.delimiter[0];
    if (!o.missing.empty()) c.dataset.missing = o.missing;
    if (o.header) c.dataset.header = true;
    if (o.max_error) c.segmentation.max_error = *o.max_error;
    if (o.seed) c.seed = *o.seed;
    if (o.runs) c.runs = *o.runs;
    if (!o.out.empty()) c.out = o.out;
    if (!o.format.empty()) c.format = o.format;
    return c;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
    } else {
        write_file_atomic(out, text);
    }
}

TimeSeries load(const ExperimentConfig& c) {
    if (c.dataset.path.empty()) throw StageError("load", "no dataset given (use --data or dataset.path)");
    try {
        return load_csv(c.dataset.path, c.dataset);
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("load", e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trend prediction experiments: segmentation, models and walk-forward evaluation"};
    app.require_subcommand(1);
    Options o;

    auto* segment = app.add_subcommand("segment", "Segment a series into a trend table");
    add_dataset_flags(segment, o);
    segment->add_option("--plot", o.plot, "Also write <base>.series.csv and <base>.hist.csv");

    auto* stats = app.add_subcommand("stats", "Dataset statistics after segmentation");
    add_dataset_flags(stats, o);
    stats->add_option("--model", o.model, "Model kind (selects the preset's feature layout)");

    auto* run = app.add_subcommand("run", "Full walk-forward experiment against the last value model");
    add_dataset_flags(run, o);
    run->add_option("--model", o.model, "lvm, mlp, lstm, cnn, trenet, rf or gbm");
    run->add_option("--seed", o.seed, "First run seed");
    run->add_option("--runs", o.runs, "Number of seeded runs");

    auto* report = app.add_subcommand("report", "Print one report, or compare a second report against a first");
    report->add_option("reports", o.reports, "Report files")->required()->expected(1, 2);

    CLI11_PARSE(app, argc, argv);

    try {
        if (segment->parsed()) {
            const auto c = resolve(o);
            const auto d = prepare(c, load(c));
            emit(format_trend_table(d.trends), c.out);
            if (!o.plot.empty()) emit_plot_data(d.series, d.trends, o.plot);
        } else if (stats->parsed()) {
            auto c = resolve(o);
            const auto d = prepare(c, load(c));
            emit(stats_text(d, o.format == "machine"), o.out);
        } else if (run->parsed()) {
            const auto c = resolve(o);
            const auto result = run_experiment(c, load(c));
            const auto json = report_json(result);
            if (!c.out.empty()) write_file_atomic(c.out, json);
            if (c.format == "human") {
                std::cout << report_table(json);
            } else if (c.out.empty()) {
                std::cout << json;
            }
        } else if (report->parsed()) {
            const auto first = read_file(o.reports[0]);
            std::cout << (o.reports.size() == 1 ? report_table(first) : compare_reports(first, read_file(o.reports[1])));
        }
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

// SPDX-License-Identifier: Apache-2.0
#include "trendlab/app/config.hpp"
#include "trendlab/app/csv.hpp"
#include "trendlab/app/experiment.hpp"
#include "trendlab/error.hpp"
#include "trendlab/evaluation.hpp"
#include "trendlab/models/predictor.hpp"
#include "trendlab/segmentation.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>

namespace py = pybind11;
using namespace trendlab;

namespace {

// NaN entries become missing values.
TimeSeries to_series(const std::vector<double>& values) {
    std::vector<std::uint8_t> missing(values.size(), 0);
    bool any = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) missing[i] = 1, any = true;
    }
    if (!any) return TimeSeries(values);
    return TimeSeries(values, std::move(missing));
}

CostKind parse_cost(const std::string& name) {
    if (name == "mean") return CostKind::mean_squared_residual;
    if (name == "sum") return CostKind::sum_squared_residual;
    throw Error("unknown cost '" + name + "' (expected mean or sum)");
}

FeatureMode parse_mode(const std::string& name) {
    if (name == "raw") return FeatureMode::raw_only;
    if (name == "raw+trend") return FeatureMode::raw_plus_trend;
    throw Error("unknown feature mode '" + name + "' (expected raw or raw+trend)");
}

py::tuple range_tuple(const evaluation::Range& r) { return py::make_tuple(r.begin, r.end); }

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Trend segmentation, trend prediction models and walk-forward evaluation";
    py::register_exception<Error>(m, "Error", PyExc_ValueError);

    py::class_<Trend>(m, "Trend")
        .def(py::init<double, std::size_t>(), py::arg("slope"), py::arg("duration"))
        .def_readonly("slope", &Trend::slope)
        .def_readonly("duration", &Trend::duration)
        .def("__eq__", [](const Trend& a, const Trend& b) { return a == b; })
        .def("__repr__", [](const Trend& t) {
            return "Trend(slope=" + py::repr(py::float_(t.slope)).cast<std::string>() +
                   ", duration=" + std::to_string(t.duration) + ")";
        });

    py::class_<TrendSequence>(m, "TrendSequence")
        .def_readonly("trends", &TrendSequence::trends)
        .def_readonly("boundaries", &TrendSequence::boundaries)
        .def("__len__", &TrendSequence::size)
        .def_static("from_trends", &TrendSequence::from_trends)
        .def("to_csv", [](const TrendSequence& t) { return app::format_trend_table(t); });

    py::class_<Instance>(m, "Instance")
        .def_readonly("local_points", &Instance::local_points)
        .def_readonly("current_trend", &Instance::current_trend)
        .def_readonly("trend_history", &Instance::trend_history)
        .def_readonly("target", &Instance::target)
        .def_readonly("features", &Instance::features);

    m.def(
        "fit_segment",
        [](const std::vector<double>& points, const std::string& cost) {
            const auto f = fit_segment(points, parse_cost(cost));
            return py::dict(py::arg("slope") = f.slope, py::arg("cost") = f.cost,
                            py::arg("intercept") = f.intercept, py::arg("coefficient") = f.coefficient);
        },
        py::arg("points"), py::arg("cost") = "mean");

    m.def(
        "segment",
        [](const std::vector<double>& values, double max_error, const std::string& cost) {
            return segment_bottom_up(impute_missing(to_series(values)), {max_error, parse_cost(cost)});
        },
        py::arg("values"), py::arg("max_error"), py::arg("cost") = "mean",
        "Bottom-up piecewise linear segmentation; NaN values are imputed first.");

    m.def(
        "build_instances",
        [](const std::vector<double>& values, const TrendSequence& trends, const std::string& mode,
           std::size_t history) {
            return build_instances(impute_missing(to_series(values)), trends, parse_mode(mode), history);
        },
        py::arg("values"), py::arg("trends"), py::arg("mode") = "raw", py::arg("history") = kDefaultHistoryLength);

    m.def(
        "make_partitions",
        [](std::size_t n, std::size_t splits, std::size_t test, std::size_t val, std::size_t train) {
            const auto plan = evaluation::make_partitions(n, splits, test, val, train);
            py::list out;
            for (const auto& s : plan.splits) {
                out.append(py::dict(py::arg("train") = range_tuple(s.train), py::arg("val") = range_tuple(s.val),
                                    py::arg("test") = range_tuple(s.test)));
            }
            return out;
        },
        py::arg("n_instances"), py::arg("splits"), py::arg("test"), py::arg("val"), py::arg("train"),
        "Walk-forward splits as half-open (begin, end) index ranges.");

    m.def(
        "warm_start_schedule",
        [](std::size_t epochs, std::size_t splits, double omega) {
            const auto s = evaluation::warm_start_schedule(epochs, splits, omega);
            return py::dict(py::arg("total_epochs") = s.total_epochs, py::arg("speedup") = s.speedup,
                            py::arg("epochs_per_split") = s.epochs_per_split);
        },
        py::arg("epochs"), py::arg("splits"), py::arg("omega"));

    m.def("rmse", [](const std::vector<double>& p, const std::vector<double>& t) { return evaluation::rmse(p, t); },
          py::arg("predictions"), py::arg("targets"));
    m.def("percent_improvement", &evaluation::percent_improvement, py::arg("model_rmse"), py::arg("baseline_rmse"));
    m.def(
        "aggregate",
        [](const std::vector<double>& v) {
            const auto a = evaluation::aggregate(v);
            return py::make_tuple(a.mean, a.std);
        },
        py::arg("values"), "Mean and population standard deviation.");

    m.def("preset_names", &app::preset_names);
    m.def(
        "preset_config",
        [](const std::string& name, const std::string& model) {
            return app::serialize(app::make_preset(name, models::parse_model_kind(model)));
        },
        py::arg("name"), py::arg("model"), "Config text for a dataset preset and model kind.");
    m.def(
        "normalize_config", [](const std::string& text) { return app::serialize(app::parse_config(text)); },
        py::arg("text"));

    m.def(
        "run_experiment",
        [](const std::string& config_text, std::optional<std::vector<double>> values) {
            const auto config = app::parse_config(config_text);
            py::gil_scoped_release release;
            const auto result = values ? app::run_experiment(config, to_series(*values)) : app::run_experiment(config);
            return app::report_json(result);
        },
        py::arg("config"), py::arg("values") = py::none(),
        "Runs a configured experiment and returns the JSON report text. Without `values`, "
        "the series is read from dataset.path.");
    m.def("report_body", &app::report_body, py::arg("report"));
    m.def("report_table", &app::report_table, py::arg("report"));
    m.def("compare_reports", &app::compare_reports, py::arg("first"), py::arg("second"));

    py::class_<models::Prediction>(m, "Prediction")
        .def_readonly("slope", &models::Prediction::slope)
        .def_readonly("duration", &models::Prediction::duration)
        .def("__iter__", [](const models::Prediction& p) {
            return py::iter(py::make_tuple(p.slope, p.duration));
        });

    py::class_<models::Predictor>(m, "Predictor")
        .def_property_readonly("kind", [](const models::Predictor& p) { return models::to_string(p.spec().kind); })
        .def(
            "fit",
            [](models::Predictor& p, const std::vector<Instance>& data, std::uint64_t seed) {
                const auto r = p.fit(data, Seed{seed});
                return r.loss_trace;
            },
            py::arg("instances"), py::arg("seed") = 0, "Trains from scratch; returns the loss trace.")
        .def(
            "update",
            [](models::Predictor& p, const std::vector<Instance>& data, std::uint64_t seed) {
                return p.update(data, Seed{seed}).loss_trace;
            },
            py::arg("instances"), py::arg("seed") = 0)
        .def("predict", &models::Predictor::predict, py::arg("instance"))
        .def(
            "predict_batch",
            [](const models::Predictor& p, const std::vector<Instance>& data) { return p.predict_batch(data); },
            py::arg("instances"))
        .def("checkpoint", &models::Predictor::checkpoint);

    m.def(
        "make_predictor",
        [](const std::string& config_text, const Instance& example) {
            const auto config = app::parse_config(config_text);
            return models::make_predictor(config.model, models::InputDims::of(example));
        },
        py::arg("config"), py::arg("example"),
        "Model from the config's model section, sized for instances shaped like `example`.");
    m.def("load_predictor", &models::load_predictor, py::arg("checkpoint"));
}

// SPDX-License-Identifier: Apache-2.0
#include "trendlab/app/config.hpp"

#include "trendlab/error.hpp"
#include "trendlab/file_io.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace trendlab::app {

using models::ModelKind;
using models::ModelSpec;
using models::PoolKind;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) throw Error(key + ": not a number: '" + v + "'");
    return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
        throw Error(key + ": not a nonnegative integer: '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw Error(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::size_t> to_list(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    if (v.empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_uint(key, trim(item)));
    return out;
}

std::string list(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string delimiter_name(char c) { return c == '\t' ? "tab" : std::string(1, c); }

char parse_delimiter(const std::string& v) {
    if (v == "tab") return '\t';
    if (v.size() != 1) throw Error("dataset.delimiter: expected one character or 'tab'");
    return v[0];
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table{
        {"preset", [](auto& c, auto&, auto& v) { c.preset = v; }},
        {"dataset.path", [](auto& c, auto&, auto& v) { c.dataset.path = v; }},
        {"dataset.column", [](auto& c, auto&, auto& v) { c.dataset.column = v; }},
        {"dataset.missing", [](auto& c, auto&, auto& v) { c.dataset.missing = v; }},
        {"dataset.delimiter", [](auto& c, auto&, auto& v) { c.dataset.delimiter = parse_delimiter(v); }},
        {"dataset.header", [](auto& c, auto& k, auto& v) { c.dataset.header = to_bool(k, v); }},
        {"segmentation.max_error", [](auto& c, auto& k, auto& v) { c.segmentation.max_error = to_double(k, v); }},
        {"segmentation.cost",
         [](auto& c, auto& k, auto& v) {
             if (v == "mean") c.segmentation.cost_kind = CostKind::mean_squared_residual;
             else if (v == "sum") c.segmentation.cost_kind = CostKind::sum_squared_residual;
             else throw Error(k + ": expected mean or sum");
         }},
        {"features.mode",
         [](auto& c, auto& k, auto& v) {
             if (v == "raw") c.feature_mode = FeatureMode::raw_only;
             else if (v == "raw+trend") c.feature_mode = FeatureMode::raw_plus_trend;
             else throw Error(k + ": expected raw or raw+trend");
         }},
        {"features.history", [](auto& c, auto& k, auto& v) { c.history_len = to_uint(k, v); }},
        {"model.kind", [](auto& c, auto&, auto& v) { c.model.kind = models::parse_model_kind(v); }},
        {"model.layers", [](auto& c, auto& k, auto& v) { c.model.net.layers = to_list(k, v); }},
        {"model.filters", [](auto& c, auto& k, auto& v) { c.model.net.filters = to_list(k, v); }},
        {"model.kernels", [](auto& c, auto& k, auto& v) { c.model.net.kernels = to_list(k, v); }},
        {"model.pool",
         [](auto& c, auto& k, auto& v) {
             if (v == "max") c.model.net.pool = PoolKind::max;
             else if (v == "identity") c.model.net.pool = PoolKind::identity;
             else throw Error(k + ": expected max or identity");
         }},
        {"model.pool_size", [](auto& c, auto& k, auto& v) { c.model.net.pool_size = to_uint(k, v); }},
        {"model.fusion", [](auto& c, auto& k, auto& v) { c.model.net.fusion_width = to_uint(k, v); }},
        {"model.dropout", [](auto& c, auto& k, auto& v) { c.model.net.dropout = to_double(k, v); }},
        {"train.batch_size", [](auto& c, auto& k, auto& v) { c.model.train.batch_size = to_uint(k, v); }},
        {"train.epochs", [](auto& c, auto& k, auto& v) { c.model.train.epochs = to_uint(k, v); }},
        {"train.learning_rate", [](auto& c, auto& k, auto& v) { c.model.train.learning_rate = to_double(k, v); }},
        {"train.weight_decay", [](auto& c, auto& k, auto& v) { c.model.train.weight_decay = to_double(k, v); }},
        {"train.warm_start", [](auto& c, auto& k, auto& v) { c.model.train.warm_start = to_double(k, v); }},
        {"train.standardize", [](auto& c, auto& k, auto& v) { c.model.train.standardize = to_bool(k, v); }},
        {"trees.n_estimators", [](auto& c, auto& k, auto& v) { c.model.trees.n_estimators = to_uint(k, v); }},
        {"trees.max_depth",
         [](auto& c, auto& k, auto& v) {
             if (v == "none") c.model.trees.max_depth.reset();
             else c.model.trees.max_depth = to_uint(k, v);
         }},
        {"trees.bootstrap", [](auto& c, auto& k, auto& v) { c.model.trees.bootstrap = to_bool(k, v); }},
        {"trees.max_samples", [](auto& c, auto& k, auto& v) { c.model.trees.max_samples = to_uint(k, v); }},
        {"trees.warm_start", [](auto& c, auto& k, auto& v) { c.model.trees.warm_start = to_bool(k, v); }},
        {"trees.learning_rate", [](auto& c, auto& k, auto& v) { c.model.trees.learning_rate = to_double(k, v); }},
        {"trees.min_samples_leaf",
         [](auto& c, auto& k, auto& v) { c.model.trees.min_samples_leaf = to_uint(k, v); }},
        {"trees.max_leaves", [](auto& c, auto& k, auto& v) { c.model.trees.max_leaves = to_uint(k, v); }},
        {"partition.splits", [](auto& c, auto& k, auto& v) { c.partition.splits = to_uint(k, v); }},
        {"partition.test", [](auto& c, auto& k, auto& v) { c.partition.test = to_uint(k, v); }},
        {"partition.val", [](auto& c, auto& k, auto& v) { c.partition.val = to_uint(k, v); }},
        {"partition.train", [](auto& c, auto& k, auto& v) { c.partition.train = to_uint(k, v); }},
        {"runs.count", [](auto& c, auto& k, auto& v) { c.runs = to_uint(k, v); }},
        {"runs.seed", [](auto& c, auto& k, auto& v) { c.seed = to_uint(k, v); }},
        {"output.path", [](auto& c, auto&, auto& v) { c.out = v; }},
        {"output.format", [](auto& c, auto&, auto& v) { c.format = v; }},
    };
    return table;
}

struct DatasetPreset {
    const char* name;
    PartitionConfig partition;
};

constexpr DatasetPreset kDatasets[] = {
    {"voltage", {8, 4227, 4227, 4227}},
    {"methane", {44, 10, 10, 3967}},
    {"nyse", {5, 1001, 1001, 4008}},
    {"jse", {101, 1, 1, 899}},
};

std::size_t dataset_index(const std::string& name) {
    for (std::size_t i = 0; i < std::size(kDatasets); ++i) {
        if (name == kDatasets[i].name) return i;
    }
    throw Error("unknown preset '" + name + "' (expected voltage, methane, nyse or jse)");
}

ModelSpec neural(ModelKind kind, std::size_t batch, double omega, double lr, double dropout, double wd,
                 std::size_t epochs, std::vector<std::size_t> layers) {
    ModelSpec s;
    s.kind = kind;
    s.net.layers = std::move(layers);
    s.net.dropout = dropout;
    s.train.batch_size = batch;
    s.train.warm_start = omega;
    s.train.learning_rate = lr;
    s.train.weight_decay = wd;
    s.train.epochs = epochs;
    return s;
}

ModelSpec trenet(double dropout, double wd, double lr, std::size_t cells, std::size_t filters, std::size_t kernel,
                 std::size_t fusion, std::size_t batch, std::size_t epochs, double omega) {
    auto s = neural(ModelKind::trenet, batch, omega, lr, dropout, wd, epochs, {cells});
    s.net.filters = {filters, filters};
    s.net.kernels = {kernel, kernel};
    s.net.fusion_width = fusion;
    return s;
}

ModelSpec cnn(std::size_t batch, double omega, double lr, double dropout, double wd, std::size_t epochs,
              std::vector<std::size_t> filters, std::vector<std::size_t> kernels, std::size_t pool) {
    auto s = neural(ModelKind::cnn, batch, omega, lr, dropout, wd, epochs, std::move(filters));
    s.net.kernels = std::move(kernels);
    s.net.pool = pool > 0 ? PoolKind::max : PoolKind::identity;
    s.net.pool_size = pool > 0 ? pool : 1;
    return s;
}

ModelSpec forest(std::size_t n, std::size_t depth, bool bootstrap, std::size_t max_samples, bool warm) {
    ModelSpec s;
    s.kind = ModelKind::rf;
    s.trees.n_estimators = n;
    s.trees.max_depth = depth;
    s.trees.bootstrap = bootstrap;
    s.trees.max_samples = max_samples;
    s.trees.warm_start = warm;
    return s;
}

ModelSpec boosting(std::size_t n, double lr) {
    ModelSpec s;
    s.kind = ModelKind::gbm;
    s.trees.n_estimators = n;
    s.trees.learning_rate = lr;
    s.trees.min_samples_leaf = 20;
    s.trees.max_leaves = 31;
    return s;
}

} // namespace

void ExperimentConfig::validate() const {
    model.validate();
    if (segmentation.max_error < 0.0) throw Error("segmentation.max_error must be nonnegative");
    if (history_len == 0) throw Error("features.history must be positive");
    if (runs == 0) throw Error("runs.count must be positive");
    if (partition.splits == 0 || partition.test == 0 || partition.train == 0) {
        throw Error("partition.splits, partition.test and partition.train must be positive");
    }
    if (format != "machine" && format != "human") throw Error("output.format must be machine or human");
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig c;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) throw Error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        try {
            it->second(c, key, value);
        } catch (const Error& e) {
            throw Error("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return c;
}

std::string serialize(const ExperimentConfig& c) {
    const auto& m = c.model;
    std::ostringstream o;
    o << "preset = " << c.preset << "\n"
      << "dataset.path = " << c.dataset.path << "\n"
      << "dataset.column = " << c.dataset.column << "\n"
      << "dataset.missing = " << c.dataset.missing << "\n"
      << "dataset.delimiter = " << delimiter_name(c.dataset.delimiter) << "\n"
      << "dataset.header = " << (c.dataset.header ? "true" : "false") << "\n"
      << "segmentation.max_error = " << fmt(c.segmentation.max_error) << "\n"
      << "segmentation.cost = "
      << (c.segmentation.cost_kind == CostKind::mean_squared_residual ? "mean" : "sum") << "\n"
      << "features.mode = " << (c.feature_mode == FeatureMode::raw_only ? "raw" : "raw+trend") << "\n"
      << "features.history = " << c.history_len << "\n"
      << "model.kind = " << models::to_string(m.kind) << "\n"
      << "model.layers = " << list(m.net.layers) << "\n"
      << "model.filters = " << list(m.net.filters) << "\n"
      << "model.kernels = " << list(m.net.kernels) << "\n"
      << "model.pool = " << (m.net.pool == PoolKind::max ? "max" : "identity") << "\n"
      << "model.pool_size = " << m.net.pool_size << "\n"
      << "model.fusion = " << m.net.fusion_width << "\n"
      << "model.dropout = " << fmt(m.net.dropout) << "\n"
      << "train.batch_size = " << m.train.batch_size << "\n"
      << "train.epochs = " << m.train.epochs << "\n"
      << "train.learning_rate = " << fmt(m.train.learning_rate) << "\n"
      << "train.weight_decay = " << fmt(m.train.weight_decay) << "\n"
      << "train.warm_start = " << fmt(m.train.warm_start) << "\n"
      << "train.standardize = " << (m.train.standardize ? "true" : "false") << "\n"
      << "trees.n_estimators = " << m.trees.n_estimators << "\n"
      << "trees.max_depth = " << (m.trees.max_depth ? std::to_string(*m.trees.max_depth) : "none") << "\n"
      << "trees.bootstrap = " << (m.trees.bootstrap ? "true" : "false") << "\n"
      << "trees.max_samples = " << m.trees.max_samples << "\n"
      << "trees.warm_start = " << (m.trees.warm_start ? "true" : "false") << "\n"
      << "trees.learning_rate = " << fmt(m.trees.learning_rate) << "\n"
      << "trees.min_samples_leaf = " << m.trees.min_samples_leaf << "\n"
      << "trees.max_leaves = " << m.trees.max_leaves << "\n"
      << "partition.splits = " << c.partition.splits << "\n"
      << "partition.test = " << c.partition.test << "\n"
      << "partition.val = " << c.partition.val << "\n"
      << "partition.train = " << c.partition.train << "\n"
      << "runs.count = " << c.runs << "\n"
      << "runs.seed = " << c.seed << "\n"
      << "output.path = " << c.out << "\n"
      << "output.format = " << c.format << "\n";
    return o.str();
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    try {
        return parse_config(read_file(path));
    } catch (const std::exception& e) {
        throw StageError("config", e.what());
    }
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"voltage", "methane", "nyse", "jse"};
    return names;
}

ModelSpec preset_model(const std::string& name, ModelKind kind) {
    const std::size_t d = dataset_index(name);
    switch (kind) {
    case ModelKind::lvm:
        return ModelSpec{};
    case ModelKind::trenet: {
        static const ModelSpec t[] = {
            trenet(0.0, 5e-4, 1e-3, 600, 16, 3, 300, 2000, 100, 0.2),
            trenet(0.0, 5e-4, 1e-3, 1500, 4, 3, 1200, 2000, 2000, 0.1),
            trenet(0.0, 0.0, 1e-3, 600, 128, 2, 300, 5000, 100, 0.5),
            trenet(0.0, 0.0, 1e-3, 5, 32, 1, 10, 500, 100, 0.05),
        };
        return t[d];
    }
    case ModelKind::mlp: {
        static const ModelSpec t[] = {
            neural(ModelKind::mlp, 4000, 0.1, 1e-4, 0.0, 0.0, 10000, {500, 400, 300}),
            neural(ModelKind::mlp, 250, 0.1, 1e-3, 0.0, 0.0, 15000, {500, 400}),
            neural(ModelKind::mlp, 5000, 0.7, 1e-3, 0.0, 5e-4, 500, {500, 400, 300}),
            neural(ModelKind::mlp, 250, 0.05, 1e-3, 0.0, 0.0, 100, {100}),
        };
        return t[d];
    }
    case ModelKind::lstm: {
        static const ModelSpec t[] = {
            neural(ModelKind::lstm, 4000, 0.1, 1e-2, 0.0, 0.0, 1000, {600}),
            neural(ModelKind::lstm, 2000, 0.1, 1e-4, 0.0, 0.0, 15000, {600, 300}),
            neural(ModelKind::lstm, 5000, 0.01, 1e-3, 0.5, 5e-5, 100, {100}),
            neural(ModelKind::lstm, 1000, 0.05, 1e-3, 0.5, 0.0, 100, {100}),
        };
        return t[d];
    }
    case ModelKind::cnn: {
        static const ModelSpec t[] = {
            cnn(2000, 0.5, 1e-3, 0.0, 5e-5, 15000, {16}, {2}, 2),
            cnn(250, 0.3, 1e-3, 0.0, 5e-4, 1000, {32, 32}, {2, 4}, 5),
            cnn(5000, 0.4, 1e-3, 0.0, 0.0, 12000, {32}, {1}, 0),
            cnn(1000, 0.1, 1e-3, 0.0, 0.0, 100, {32, 32}, {1, 1}, 0),
        };
        return t[d];
    }
    case ModelKind::rf: {
        static const ModelSpec t[] = {
            forest(50, 2, true, 2000, false),
            forest(50, 10, false, 0, false),
            forest(200, 1, true, 0, true),
            forest(100, 1, false, 0, true),
        };
        return t[d];
    }
    case ModelKind::gbm: {
        static const ModelSpec t[] = {boosting(1, 0.1), boosting(10000, 0.1), boosting(1, 0.2), boosting(4, 0.1)};
        return t[d];
    }
    }
    throw Error("unknown model kind");
}

ExperimentConfig make_preset(const std::string& name, ModelKind kind) {
    ExperimentConfig c;
    c.preset = name;
    c.partition = kDatasets[dataset_index(name)].partition;
    c.model = preset_model(name, kind);
    return c;
}

} // namespace trendlab::app

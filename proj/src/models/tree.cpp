// SPDX-License-Identifier: Apache-2.0
#include "trendlab/models/tree.hpp"

#include "trendlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace trendlab::models {

namespace {

constexpr double kTieTolerance = 1e-12;

struct Split {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
    double gain = 0.0;
};

struct Pending {
    int node = -1;
    std::vector<std::size_t> rows;
    std::size_t depth = 0;
    Split split;
};

class Builder {
public:
    Builder(const FeatureMatrix& x, std::span<const double> y, std::size_t k, const TreeParams& params)
        : x_(x), y_(y), k_(k), params_(params) {}

    std::vector<TreeNode> build(std::vector<std::size_t> rows) {
        nodes_.clear();
        std::vector<Pending> open;
        Pending root = make_pending(std::move(rows), 0);
        if (root.split.found) open.push_back(std::move(root));
        std::size_t leaves = 1;
        while (!open.empty()) {
            // Best-first by gain when leaves are capped; creation order otherwise.
            std::size_t pick = 0;
            if (params_.max_leaves > 0) {
                for (std::size_t i = 1; i < open.size(); ++i) {
                    if (open[i].split.gain > open[pick].split.gain) pick = i;
                }
            }
            if (params_.max_leaves > 0 && leaves >= params_.max_leaves) break;
            Pending p = std::move(open[pick]);
            open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
            std::vector<std::size_t> left, right;
            for (std::size_t r : p.rows) {
                (x_.row(r)[static_cast<std::size_t>(p.split.feature)] <= p.split.threshold ? left : right).push_back(r);
            }
            auto& node = nodes_[static_cast<std::size_t>(p.node)];
            node.feature = p.split.feature;
            node.threshold = p.split.threshold;
            Pending l = make_pending(std::move(left), p.depth + 1);
            Pending r = make_pending(std::move(right), p.depth + 1);
            nodes_[static_cast<std::size_t>(p.node)].left = l.node;
            nodes_[static_cast<std::size_t>(p.node)].right = r.node;
            if (l.split.found) open.push_back(std::move(l));
            if (r.split.found) open.push_back(std::move(r));
            ++leaves;
        }
        return std::move(nodes_);
    }

private:
    Pending make_pending(std::vector<std::size_t> rows, std::size_t depth) {
        TreeNode node;
        node.samples = rows.size();
        node.value.assign(k_, 0.0);
        // Running mean: exact when every target is equal.
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < k_; ++j) {
                node.value[j] += (y_[rows[i] * k_ + j] - node.value[j]) / static_cast<double>(i + 1);
            }
        }
        Pending p;
        p.node = static_cast<int>(nodes_.size());
        p.depth = depth;
        nodes_.push_back(std::move(node));
        const bool depth_ok = !params_.max_depth || depth < *params_.max_depth;
        if (depth_ok && rows.size() >= 2 * params_.min_samples_leaf && !pure(rows)) {
            p.split = best_split(rows, nodes_.back().value);
        }
        p.rows = std::move(rows);
        return p;
    }

    bool pure(const std::vector<std::size_t>& rows) const {
        for (std::size_t r : rows) {
            for (std::size_t j = 0; j < k_; ++j) {
                if (y_[r * k_ + j] != y_[rows[0] * k_ + j]) return false;
            }
        }
        return true;
    }

    Split best_split(const std::vector<std::size_t>& rows, const std::vector<double>& mean) const {
        const std::size_t n = rows.size();
        // Targets centred on the node mean keep the running sums well conditioned.
        std::vector<double> centred(n * k_);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k_; ++j) centred[i * k_ + j] = y_[rows[i] * k_ + j] - mean[j];
        }
        double parent = 0.0;
        for (double v : centred) parent += v * v;

        Split best;
        std::vector<std::size_t> order(n);
        std::vector<double> sum_l(k_), sq_l(k_), sum_t(k_, 0.0), sq_t(k_, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k_; ++j) {
                sum_t[j] += centred[i * k_ + j];
                sq_t[j] += centred[i * k_ + j] * centred[i * k_ + j];
            }
        }
        const std::size_t min_leaf = params_.min_samples_leaf;
        for (std::size_t f = 0; f < x_.n_features; ++f) {
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return x_.row(rows[a])[f] < x_.row(rows[b])[f];
            });
            std::fill(sum_l.begin(), sum_l.end(), 0.0);
            std::fill(sq_l.begin(), sq_l.end(), 0.0);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                for (std::size_t j = 0; j < k_; ++j) {
                    const double v = centred[order[i] * k_ + j];
                    sum_l[j] += v;
                    sq_l[j] += v * v;
                }
                const std::size_t nl = i + 1, nr = n - nl;
                const double lo = x_.row(rows[order[i]])[f], hi = x_.row(rows[order[i + 1]])[f];
                if (!(lo < hi) || nl < min_leaf || nr < min_leaf) continue;
                double sse = 0.0;
                for (std::size_t j = 0; j < k_; ++j) {
                    const double sr = sum_t[j] - sum_l[j], qr = sq_t[j] - sq_l[j];
                    sse += sq_l[j] - sum_l[j] * sum_l[j] / static_cast<double>(nl);
                    sse += qr - sr * sr / static_cast<double>(nr);
                }
                if (!best.found || sse < best.sse - kTieTolerance * std::max(1.0, std::abs(best.sse))) {
                    best.found = true;
                    best.feature = static_cast<int>(f);
                    best.threshold = lo + (hi - lo) / 2.0;
                    best.sse = sse;
                }
            }
        }
        best.gain = parent - best.sse;
        return best;
    }

    const FeatureMatrix& x_;
    std::span<const double> y_;
    std::size_t k_;
    TreeParams params_;
    std::vector<TreeNode> nodes_;
};

} // namespace

FeatureMatrix FeatureMatrix::from_instances(std::span<const Instance> instances) {
    FeatureMatrix m;
    m.n_rows = instances.size();
    m.n_features = instances.empty() ? 0 : instances[0].features.size();
    m.values.reserve(m.n_rows * m.n_features);
    for (const auto& inst : instances) {
        if (inst.features.size() != m.n_features) throw Error("instances have differing feature sizes");
        m.values.insert(m.values.end(), inst.features.begin(), inst.features.end());
    }
    return m;
}

std::vector<double> trend_targets(std::span<const Instance> instances) {
    std::vector<double> y;
    y.reserve(2 * instances.size());
    for (const auto& inst : instances) {
        y.push_back(inst.target.slope);
        y.push_back(static_cast<double>(inst.target.duration));
    }
    return y;
}

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw Error("a tree needs at least one node");
    const auto n = static_cast<int>(nodes_.size());
    for (const auto& node : nodes_) {
        if (!node.is_leaf() && (node.left <= 0 || node.right <= 0 || node.left >= n || node.right >= n)) {
            throw Error("tree node has out-of-range children");
        }
    }
}

RegressionTree RegressionTree::fit(const FeatureMatrix& x, std::span<const double> y, std::size_t n_outputs,
                                   std::span<const std::size_t> rows, const TreeParams& params) {
    if (rows.empty()) throw Error("cannot fit a tree on zero rows");
    if (n_outputs == 0 || y.size() != x.n_rows * n_outputs) throw Error("target size does not match rows");
    if (params.min_samples_leaf == 0) throw Error("min_samples_leaf must be positive");
    for (std::size_t r : rows) {
        if (r >= x.n_rows) throw Error("tree row index out of range");
    }
    Builder b(x, y, n_outputs, params);
    return RegressionTree(b.build(std::vector<std::size_t>(rows.begin(), rows.end())));
}

RegressionTree RegressionTree::fit(const FeatureMatrix& x, std::span<const double> y, std::size_t n_outputs,
                                   const TreeParams& params) {
    std::vector<std::size_t> rows(x.n_rows);
    std::iota(rows.begin(), rows.end(), 0);
    return fit(x, y, n_outputs, rows, params);
}

std::span<const double> RegressionTree::predict(std::span<const double> x) const {
    if (nodes_.empty()) throw Error("tree is not fitted");
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& node = nodes_[i];
        const auto f = static_cast<std::size_t>(node.feature);
        if (f >= x.size()) throw Error("feature vector is shorter than the tree expects");
        i = static_cast<std::size_t>(x[f] <= node.threshold ? node.left : node.right);
    }
    return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes_[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return best;
}

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(),
                                                  [](const TreeNode& n) { return n.is_leaf(); }));
}

} // namespace trendlab::models

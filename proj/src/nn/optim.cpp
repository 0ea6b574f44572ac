// SPDX-License-Identifier: Apache-2.0
#include "trendlab/nn/optim.hpp"

#include "trendlab/error.hpp"

#include <cmath>

namespace trendlab::nn {

void he_fill(std::span<double> out, std::size_t fan_in, Rng& rng) {
    if (fan_in == 0) throw Error("he_init: fan_in must be at least 1");
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (double& v : out) v = normal(rng);
}

Tensor he_init(const Shape& shape, std::size_t fan_in, Seed seed) {
    Tensor t(shape);
    Rng rng = make_rng(seed);
    he_fill(t.data, fan_in, rng);
    return t;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
    if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
        state.second_moment.size() != params.size()) {
        throw Error("adam_step: parameter, gradient and state sizes differ");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        const double m_hat = m / correction1;
        const double v_hat = v / correction2;
        params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

LossResult joint_loss(std::span<const Pair> predictions, std::span<const Pair> targets) {
    if (predictions.empty()) throw Error("joint_loss: empty batch");
    if (predictions.size() != targets.size()) throw Error("joint_loss: batch sizes differ");

    const double n = static_cast<double>(predictions.size());
    LossResult out;
    out.grad.resize(predictions.size());
    double slope_sse = 0.0, duration_sse = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double ds = predictions[i][0] - targets[i][0];
        const double dd = predictions[i][1] - targets[i][1];
        slope_sse += ds * ds;
        duration_sse += dd * dd;
        out.grad[i] = {ds / n, dd / n};
    }
    out.loss = 0.5 * slope_sse / n + 0.5 * duration_sse / n;
    return out;
}

} // namespace trendlab::nn

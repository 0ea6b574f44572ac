// SPDX-License-Identifier: Apache-2.0
#include "trendlab/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace trendlab::nn {

namespace {

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
    return std::abs(analytic - numeric) / denom;
}

double quadratic_loss(const Tensor& out, const std::vector<double>& reference) {
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double d = out.data[i] - reference[i];
        loss += 0.5 * d * d;
    }
    return loss;
}

} // namespace

GradCheckResult grad_check(const Network& net, const NetInput& input, Seed seed, double step) {
    const Shape out_shape = net.architecture().output_shape();
    std::vector<double> reference(shape_size(out_shape));
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& r : reference) r = normal(rng);

    Network probe = net;
    NetCache cache;
    const Tensor out = probe.forward(input, cache, ForwardMode{});
    Tensor grad_out(out.shape);
    for (std::size_t i = 0; i < out.size(); ++i) grad_out.data[i] = out.data[i] - reference[i];
    const Gradients grads = probe.backward(cache, grad_out);

    auto loss_at = [&](const Network& n, const NetInput& in) {
        return quadratic_loss(n.predict(in), reference);
    };

    GradCheckResult result;
    std::vector<double> params(probe.params().begin(), probe.params().end());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + step;
        probe.set_params(params);
        const double up = loss_at(probe, input);
        params[i] = saved - step;
        probe.set_params(params);
        const double down = loss_at(probe, input);
        params[i] = saved;
        const double err = relative_error(grads.params[i], (up - down) / (2.0 * step));
        if (err > result.max_param_error) {
            result.max_param_error = err;
            result.worst_param = i;
        }
    }
    probe.set_params(params);

    auto check_input = [&](Tensor NetInput::*member, const Tensor& analytic) {
        NetInput perturbed = input;
        Tensor& x = perturbed.*member;
        for (std::size_t i = 0; i < x.size() && i < analytic.size(); ++i) {
            const double saved = x.data[i];
            x.data[i] = saved + step;
            const double up = loss_at(probe, perturbed);
            x.data[i] = saved - step;
            const double down = loss_at(probe, perturbed);
            x.data[i] = saved;
            result.max_input_error = std::max(
                result.max_input_error, relative_error(analytic.data[i], (up - down) / (2.0 * step)));
        }
    };
    check_input(&NetInput::primary, grads.primary_input);
    check_input(&NetInput::secondary, grads.secondary_input);
    return result;
}

GradCheckResult grad_check(const std::vector<LayerSpec>& layers, const Tensor& input, Seed seed,
                           double step) {
    auto arch = std::make_shared<StackArchitecture>(layers, input.shape);
    Network net(arch);
    net.initialize(seed);
    return grad_check(net, NetInput{input, {}}, derive(seed, 1), step);
}

} // namespace trendlab::nn

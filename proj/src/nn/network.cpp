// SPDX-License-Identifier: Apache-2.0
#include "trendlab/nn/network.hpp"

#include "trendlab/error.hpp"

#include <atomic>

namespace trendlab::nn {

namespace {

std::uint64_t next_network_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

} // namespace

Tensor StackArchitecture::forward(std::span<const double> params, const NetInput& in,
                                  NetCache& cache, const ForwardMode& mode) const {
    cache.stacks.resize(1);
    return stack_.forward(params, in.primary, cache.stacks[0], mode);
}

void StackArchitecture::backward(std::span<const double> params, const NetCache& cache,
                                 const Tensor& grad_out, Gradients& grads) const {
    if (cache.stacks.size() != 1) throw Error("cache does not match this network");
    grads.primary_input = stack_.backward(params, cache.stacks[0], grad_out, grads.params);
}

HybridArchitecture::HybridArchitecture(const std::vector<LayerSpec>& conv_branch, Shape local_shape,
                                       const std::vector<LayerSpec>& recurrent_branch,
                                       Shape history_shape, const std::vector<LayerSpec>& head) {
    try {
        conv_ = Sequential(conv_branch, std::move(local_shape));
    } catch (const Error& e) {
        throw Error(std::string("convolutional branch: ") + e.what());
    }
    try {
        recurrent_ = Sequential(recurrent_branch, std::move(history_shape));
    } catch (const Error& e) {
        throw Error(std::string("recurrent branch: ") + e.what());
    }
    if (conv_.output_shape() != recurrent_.output_shape()) {
        throw Error("branch projections differ: " + shape_string(conv_.output_shape()) + " vs " +
                    shape_string(recurrent_.output_shape()));
    }
    try {
        head_ = Sequential(head, conv_.output_shape());
    } catch (const Error& e) {
        throw Error(std::string("fusion head: ") + e.what());
    }
}

std::size_t HybridArchitecture::param_count() const {
    return conv_.param_count() + recurrent_.param_count() + head_.param_count();
}

void HybridArchitecture::init(std::span<double> params, Rng& rng) const {
    conv_.init(params.first(conv_.param_count()), rng);
    recurrent_.init(params.subspan(conv_.param_count(), recurrent_.param_count()), rng);
    head_.init(params.subspan(conv_.param_count() + recurrent_.param_count()), rng);
}

Tensor HybridArchitecture::forward(std::span<const double> params, const NetInput& in,
                                   NetCache& cache, const ForwardMode& mode) const {
    cache.stacks.resize(3);
    const auto nc = conv_.param_count(), nr = recurrent_.param_count();
    Tensor local = conv_.forward(params.first(nc), in.primary, cache.stacks[0], mode);
    const Tensor global = recurrent_.forward(params.subspan(nc, nr), in.secondary, cache.stacks[1], mode);
    for (std::size_t i = 0; i < local.size(); ++i) local.data[i] += global.data[i];
    return head_.forward(params.subspan(nc + nr), local, cache.stacks[2], mode);
}

void HybridArchitecture::backward(std::span<const double> params, const NetCache& cache,
                                  const Tensor& grad_out, Gradients& grads) const {
    if (cache.stacks.size() != 3) throw Error("cache does not match this network");
    const auto nc = conv_.param_count(), nr = recurrent_.param_count();
    std::span<double> g = grads.params;
    const Tensor fused = head_.backward(params.subspan(nc + nr), cache.stacks[2], grad_out,
                                       g.subspan(nc + nr));
    grads.primary_input = conv_.backward(params.first(nc), cache.stacks[0], fused, g.first(nc));
    grads.secondary_input =
        recurrent_.backward(params.subspan(nc, nr), cache.stacks[1], fused, g.subspan(nc, nr));
}

std::pair<std::size_t, std::size_t> HybridArchitecture::recurrent_projection_range() const {
    const std::size_t last = recurrent_.size() - 1;
    return {conv_.param_count() + recurrent_.offsets()[last], recurrent_.layer(last).param_count()};
}

Network::Network(std::shared_ptr<const Architecture> arch)
    : arch_(std::move(arch)), params_(arch_->param_count(), 0.0), id_(next_network_id()) {}

Network::Network(const Network& other)
    : arch_(other.arch_), params_(other.params_), id_(next_network_id()) {}

Network& Network::operator=(const Network& other) {
    if (this != &other) {
        arch_ = other.arch_;
        params_ = other.params_;
        id_ = next_network_id();
        version_ = 0;
    }
    return *this;
}

void Network::initialize(Seed seed) {
    Rng rng = make_rng(seed);
    arch_->init(params_, rng);
    ++version_;
}

std::span<double> Network::mutable_params() noexcept {
    ++version_;
    return params_;
}

void Network::set_params(std::vector<double> params) {
    if (params.size() != arch_->param_count()) {
        throw Error("parameter count " + std::to_string(params.size()) + " does not match network (" +
                    std::to_string(arch_->param_count()) + ")");
    }
    params_ = std::move(params);
    ++version_;
}

Tensor Network::forward(const NetInput& in, NetCache& cache, const ForwardMode& mode) const {
    cache.owner = id_;
    cache.version = version_;
    return arch_->forward(params_, in, cache, mode);
}

Gradients Network::backward(const NetCache& cache, const Tensor& grad_out) const {
    Gradients grads;
    grads.params.assign(params_.size(), 0.0);
    accumulate_gradients(cache, grad_out, grads);
    return grads;
}

void Network::accumulate_gradients(const NetCache& cache, const Tensor& grad_out,
                                   Gradients& grads) const {
    if (cache.owner != id_ || cache.version != version_) {
        throw Error("stale or mismatched forward cache");
    }
    if (grad_out.size() != shape_size(arch_->output_shape())) {
        throw Error("output gradient does not match network output shape");
    }
    if (grads.params.size() != params_.size()) throw Error("gradient buffer has the wrong size");
    arch_->backward(params_, cache, grad_out, grads);
}

Tensor Network::predict(const NetInput& in) const {
    NetCache cache;
    return forward(in, cache, ForwardMode{});
}

} // namespace trendlab::nn

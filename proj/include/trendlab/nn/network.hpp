// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/nn/layers.hpp"
#include "trendlab/nn/tensor.hpp"
#include "trendlab/random.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace trendlab::nn {

/// Network inputs. Single-stack networks read `primary` only; the hybrid
/// network reads local points from `primary` and trend history from `secondary`.
struct NetInput {
    Tensor primary;
    Tensor secondary;
};

/// Activations from one forward call. Tagged with the producing network and
/// its parameter version so backward can refuse a stale or foreign cache.
struct NetCache {
    std::uint64_t owner = 0;
    std::uint64_t version = 0;
    std::vector<SequentialCache> stacks;
};

struct Gradients {
    std::vector<double> params;
    Tensor primary_input;
    Tensor secondary_input;
};

/// Fixed topology over a flat parameter buffer.
class Architecture {
public:
    virtual ~Architecture() = default;

    virtual std::string name() const = 0;
    virtual std::size_t param_count() const = 0;
    virtual Shape output_shape() const = 0;
    virtual void init(std::span<double> params, Rng& rng) const = 0;
    virtual Tensor forward(std::span<const double> params, const NetInput& in, NetCache& cache,
                           const ForwardMode& mode) const = 0;
    virtual void backward(std::span<const double> params, const NetCache& cache,
                          const Tensor& grad_out, Gradients& grads) const = 0;
};

/// One layer stack.
class StackArchitecture final : public Architecture {
public:
    StackArchitecture(const std::vector<LayerSpec>& layers, Shape input_shape, std::string name = "stack")
        : stack_(layers, std::move(input_shape)), name_(std::move(name)) {}

    std::string name() const override { return name_; }
    std::size_t param_count() const override { return stack_.param_count(); }
    Shape output_shape() const override { return stack_.output_shape(); }
    const Sequential& stack() const noexcept { return stack_; }

    void init(std::span<double> params, Rng& rng) const override { stack_.init(params, rng); }
    Tensor forward(std::span<const double> params, const NetInput& in, NetCache& cache,
                   const ForwardMode& mode) const override;
    void backward(std::span<const double> params, const NetCache& cache, const Tensor& grad_out,
                  Gradients& grads) const override;

private:
    Sequential stack_;
    std::string name_;
};

/// Two-branch fusion network: a convolutional branch over local points and a
/// recurrent branch over trend history, each projected to a common width,
/// summed element-wise and passed through dropout and the output layer.
class HybridArchitecture final : public Architecture {
public:
    HybridArchitecture(const std::vector<LayerSpec>& conv_branch, Shape local_shape,
                       const std::vector<LayerSpec>& recurrent_branch, Shape history_shape,
                       const std::vector<LayerSpec>& head);

    std::string name() const override { return "hybrid"; }
    std::size_t param_count() const override;
    Shape output_shape() const override { return head_.output_shape(); }
    void init(std::span<double> params, Rng& rng) const override;
    Tensor forward(std::span<const double> params, const NetInput& in, NetCache& cache,
                   const ForwardMode& mode) const override;
    void backward(std::span<const double> params, const NetCache& cache, const Tensor& grad_out,
                  Gradients& grads) const override;

    const Sequential& conv_branch() const noexcept { return conv_; }
    const Sequential& recurrent_branch() const noexcept { return recurrent_; }
    const Sequential& head() const noexcept { return head_; }

    /// [offset, offset + count) of the recurrent branch's projection layer weights and bias.
    std::pair<std::size_t, std::size_t> recurrent_projection_range() const;

private:
    Sequential conv_;
    Sequential recurrent_;
    Sequential head_;
};

/// Architecture plus owned parameters.
class Network {
public:
    explicit Network(std::shared_ptr<const Architecture> arch);
    Network(const Network& other);
    Network& operator=(const Network& other);
    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    const Architecture& architecture() const noexcept { return *arch_; }
    std::shared_ptr<const Architecture> shared_architecture() const noexcept { return arch_; }

    /// He-initialises weights from `seed`; biases zero (forget gates one).
    void initialize(Seed seed);

    std::span<const double> params() const noexcept { return params_; }
    /// Mutable view; invalidates caches from earlier forward calls.
    std::span<double> mutable_params() noexcept;
    void set_params(std::vector<double> params);

    Tensor forward(const NetInput& in, NetCache& cache, const ForwardMode& mode) const;
    Gradients backward(const NetCache& cache, const Tensor& grad_out) const;

    /// Adds this sample's parameter gradients into `grads.params`, which must
    /// already be sized to param_count().
    void accumulate_gradients(const NetCache& cache, const Tensor& grad_out, Gradients& grads) const;

    /// Evaluation-mode forward.
    Tensor predict(const NetInput& in) const;

private:
    std::shared_ptr<const Architecture> arch_;
    std::vector<double> params_;
    std::uint64_t id_;
    std::uint64_t version_ = 0;
};

} // namespace trendlab::nn

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trendlab/nn/tensor.hpp"
#include "trendlab/random.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace trendlab::nn {

enum class LayerKind { dense, conv1d, lstm, relu, dropout, maxpool, identity_pool };

std::string to_string(LayerKind kind);

/// Declarative layer description. `units` is out_dim (dense), filters (conv1d)
/// or cells (lstm).
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t units = 0;
    std::size_t kernel = 0;
    std::size_t pool = 1;
    double p = 0.0;
    bool return_sequences = false; ///< lstm only: emit every hidden state instead of the last

    static LayerSpec dense(std::size_t out_dim) { return {LayerKind::dense, out_dim}; }
    static LayerSpec conv1d(std::size_t filters, std::size_t kernel) {
        return {LayerKind::conv1d, filters, kernel};
    }
    static LayerSpec lstm(std::size_t cells, bool return_sequences = false) {
        LayerSpec s{LayerKind::lstm, cells};
        s.return_sequences = return_sequences;
        return s;
    }
    static LayerSpec relu() { return {LayerKind::relu}; }
    static LayerSpec dropout(double p) {
        LayerSpec s{LayerKind::dropout};
        s.p = p;
        return s;
    }
    static LayerSpec maxpool(std::size_t size) {
        LayerSpec s{LayerKind::maxpool};
        s.pool = size;
        return s;
    }
    static LayerSpec identity_pool() { return {LayerKind::identity_pool}; }

    void validate() const;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Per-call activations saved by forward for the matching backward.
struct LayerCache {
    Tensor input;
    std::vector<double> aux;
    std::vector<std::size_t> index;
};

struct ForwardMode {
    bool train = false;
    Rng* rng = nullptr; ///< required when train is set and dropout is active
};

/// A layer bound to a fixed input shape. Parameters live outside the layer in
/// a flat buffer; the layer only knows how many it needs and their layout.
class Layer {
public:
    Layer(LayerSpec spec, Shape input_shape, Shape output_shape)
        : spec_(spec), input_shape_(std::move(input_shape)), output_shape_(std::move(output_shape)) {}
    virtual ~Layer() = default;

    const LayerSpec& spec() const noexcept { return spec_; }
    const Shape& input_shape() const noexcept { return input_shape_; }
    const Shape& output_shape() const noexcept { return output_shape_; }

    virtual std::size_t param_count() const { return 0; }
    virtual void init(std::span<double> /*params*/, Rng& /*rng*/) const {}

    virtual Tensor forward(std::span<const double> params, const Tensor& in, LayerCache& cache,
                           const ForwardMode& mode) const = 0;

    /// Accumulates into grad_params and returns the gradient w.r.t. the input.
    virtual Tensor backward(std::span<const double> params, const LayerCache& cache,
                            const Tensor& grad_out, std::span<double> grad_params) const = 0;

private:
    LayerSpec spec_;
    Shape input_shape_;
    Shape output_shape_;
};

/// Throws trendlab::Error when `input_shape` is not acceptable for the spec.
std::shared_ptr<const Layer> make_layer(const LayerSpec& spec, const Shape& input_shape);

struct SequentialCache {
    std::vector<LayerCache> layers;
};

/// Layer stack with shape checking at construction. Shape errors name the
/// offending layer by position and kind.
class Sequential {
public:
    Sequential() = default;
    Sequential(const std::vector<LayerSpec>& specs, Shape input_shape);

    std::size_t param_count() const noexcept { return param_count_; }
    const Shape& input_shape() const noexcept { return input_shape_; }
    const Shape& output_shape() const noexcept {
        return layers_.empty() ? input_shape_ : layers_.back()->output_shape();
    }
    std::size_t size() const noexcept { return layers_.size(); }
    const Layer& layer(std::size_t i) const { return *layers_[i]; }
    std::span<const std::size_t> offsets() const noexcept { return offsets_; }
    std::vector<LayerSpec> specs() const;

    void init(std::span<double> params, Rng& rng) const;
    Tensor forward(std::span<const double> params, const Tensor& in, SequentialCache& cache,
                   const ForwardMode& mode) const;
    Tensor backward(std::span<const double> params, const SequentialCache& cache,
                    const Tensor& grad_out, std::span<double> grad_params) const;

private:
    Shape input_shape_;
    std::vector<std::shared_ptr<const Layer>> layers_;
    std::vector<std::size_t> offsets_;
    std::size_t param_count_ = 0;
};

} // namespace trendlab::nn

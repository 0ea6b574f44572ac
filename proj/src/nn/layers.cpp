// SPDX-License-Identifier: Apache-2.0
#include "trendlab/nn/layers.hpp"

#include "trendlab/error.hpp"
#include "trendlab/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace trendlab::nn {

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != shape_size(shape)) {
        throw Error("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                    shape_string(shape));
    }
}

std::string to_string(LayerKind kind) {
    switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::lstm: return "lstm";
    case LayerKind::relu: return "relu";
    case LayerKind::dropout: return "dropout";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::identity_pool: return "identity-pool";
    }
    return "unknown";
}

void LayerSpec::validate() const {
    switch (kind) {
    case LayerKind::dense:
    case LayerKind::lstm:
        if (units < 1) throw Error(to_string(kind) + " needs at least one unit");
        break;
    case LayerKind::conv1d:
        if (units < 1 || kernel < 1) throw Error("conv1d needs filters >= 1 and kernel >= 1");
        break;
    case LayerKind::dropout:
        if (!(p >= 0.0 && p < 1.0)) throw Error("dropout probability must be in [0, 1)");
        break;
    case LayerKind::maxpool:
        if (pool < 1) throw Error("pool size must be at least 1");
        break;
    case LayerKind::relu:
    case LayerKind::identity_pool:
        break;
    }
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// [L] is read as a single-channel sequence [L, 1].
Shape as_sequence(const Shape& in) {
    if (in.size() == 1) return {in[0], 1};
    if (in.size() == 2) return in;
    throw Error("expected a sequence input, got shape " + shape_string(in));
}

class Dense final : public Layer {
public:
    Dense(const LayerSpec& spec, const Shape& in)
        : Layer(spec, in, {spec.units}), in_dim_(shape_size(in)), out_dim_(spec.units) {
        if (in_dim_ == 0) throw Error("empty input");
    }

    std::size_t param_count() const override { return out_dim_ * in_dim_ + out_dim_; }

    void init(std::span<double> params, Rng& rng) const override {
        he_fill(params.first(out_dim_ * in_dim_), in_dim_, rng);
        std::fill(params.begin() + static_cast<std::ptrdiff_t>(out_dim_ * in_dim_), params.end(), 0.0);
    }

    Tensor forward(std::span<const double> params, const Tensor& in, LayerCache& cache,
                   const ForwardMode&) const override {
        cache.input = in;
        Tensor out({out_dim_});
        const double* w = params.data();
        const double* b = w + out_dim_ * in_dim_;
        for (std::size_t o = 0; o < out_dim_; ++o) {
            double acc = b[o];
            const double* row = w + o * in_dim_;
            for (std::size_t i = 0; i < in_dim_; ++i) acc += row[i] * in.data[i];
            out.data[o] = acc;
        }
        return out;
    }

    Tensor backward(std::span<const double> params, const LayerCache& cache, const Tensor& grad_out,
                    std::span<double> grad_params) const override {
        Tensor grad_in(input_shape());
        const double* w = params.data();
        double* gw = grad_params.data();
        double* gb = gw + out_dim_ * in_dim_;
        const auto& x = cache.input.data;
        for (std::size_t o = 0; o < out_dim_; ++o) {
            const double g = grad_out.data[o];
            gb[o] += g;
            if (g == 0.0) continue;
            const double* row = w + o * in_dim_;
            double* grow = gw + o * in_dim_;
            for (std::size_t i = 0; i < in_dim_; ++i) {
                grow[i] += g * x[i];
                grad_in.data[i] += g * row[i];
            }
        }
        return grad_in;
    }

private:
    std::size_t in_dim_;
    std::size_t out_dim_;
};

/// Valid cross-correlation, stride 1. Weights laid out [filter][tap][channel].
class Conv1d final : public Layer {
public:
    Conv1d(const LayerSpec& spec, const Shape& in, std::size_t length, std::size_t channels)
        : Layer(spec, in, {length - spec.kernel + 1, spec.units}),
          length_(length), channels_(channels), filters_(spec.units), kernel_(spec.kernel) {}

    std::size_t param_count() const override { return filters_ * kernel_ * channels_ + filters_; }

    void init(std::span<double> params, Rng& rng) const override {
        const std::size_t nw = filters_ * kernel_ * channels_;
        he_fill(params.first(nw), kernel_ * channels_, rng);
        std::fill(params.begin() + static_cast<std::ptrdiff_t>(nw), params.end(), 0.0);
    }

    Tensor forward(std::span<const double> params, const Tensor& in, LayerCache& cache,
                   const ForwardMode&) const override {
        cache.input = in;
        const std::size_t out_len = length_ - kernel_ + 1;
        const std::size_t span = kernel_ * channels_;
        Tensor out({out_len, filters_});
        const double* w = params.data();
        const double* b = w + filters_ * span;
        for (std::size_t t = 0; t < out_len; ++t) {
            const double* window = in.data.data() + t * channels_; // contiguous kernel_ x channels_
            for (std::size_t f = 0; f < filters_; ++f) {
                const double* wf = w + f * span;
                double acc = b[f];
                for (std::size_t j = 0; j < span; ++j) acc += wf[j] * window[j];
                out.data[t * filters_ + f] = acc;
            }
        }
        return out;
    }

    Tensor backward(std::span<const double> params, const LayerCache& cache, const Tensor& grad_out,
                    std::span<double> grad_params) const override {
        const std::size_t out_len = length_ - kernel_ + 1;
        const std::size_t span = kernel_ * channels_;
        Tensor grad_in(input_shape());
        const double* w = params.data();
        double* gw = grad_params.data();
        double* gb = gw + filters_ * span;
        for (std::size_t t = 0; t < out_len; ++t) {
            const double* window = cache.input.data.data() + t * channels_;
            double* gwindow = grad_in.data.data() + t * channels_;
            for (std::size_t f = 0; f < filters_; ++f) {
                const double g = grad_out.data[t * filters_ + f];
                gb[f] += g;
                if (g == 0.0) continue;
                const double* wf = w + f * span;
                double* gwf = gw + f * span;
                for (std::size_t j = 0; j < span; ++j) {
                    gwf[j] += g * window[j];
                    gwindow[j] += g * wf[j];
                }
            }
        }
        return grad_in;
    }

private:
    std::size_t length_, channels_, filters_, kernel_;
};

/// Standard LSTM cell unrolled over the sequence; state starts at zero for
/// every call. Gate order i, f, g, o. Layout: W_x [4H x C], W_h [4H x H], b [4H].
class Lstm final : public Layer {
public:
    Lstm(const LayerSpec& spec, const Shape& in, std::size_t steps, std::size_t channels)
        : Layer(spec, in,
                spec.return_sequences ? Shape{steps, spec.units} : Shape{spec.units}),
          steps_(steps), channels_(channels), cells_(spec.units) {}

    std::size_t param_count() const override {
        return 4 * cells_ * channels_ + 4 * cells_ * cells_ + 4 * cells_;
    }

    void init(std::span<double> params, Rng& rng) const override {
        const std::size_t nx = 4 * cells_ * channels_, nh = 4 * cells_ * cells_;
        he_fill(params.first(nx), channels_, rng);
        he_fill(params.subspan(nx, nh), cells_, rng);
        auto bias = params.subspan(nx + nh);
        std::fill(bias.begin(), bias.end(), 0.0);
        std::fill(bias.begin() + static_cast<std::ptrdiff_t>(cells_),
                  bias.begin() + static_cast<std::ptrdiff_t>(2 * cells_), 1.0); // forget gate
    }

    // Per step the cache keeps 7H values: i f g o c h tanh(c).
    Tensor forward(std::span<const double> params, const Tensor& in, LayerCache& cache,
                   const ForwardMode&) const override {
        cache.input = in;
        const std::size_t H = cells_, C = channels_, stride = 7 * H;
        const double* wx = params.data();
        const double* wh = wx + 4 * H * C;
        const double* b = wh + 4 * H * H;
        cache.aux.assign(steps_ * stride, 0.0);
        std::vector<double> z(4 * H);
        std::vector<double> h_prev(H, 0.0), c_prev(H, 0.0);

        for (std::size_t t = 0; t < steps_; ++t) {
            const double* x = in.data.data() + t * C;
            for (std::size_t r = 0; r < 4 * H; ++r) {
                double acc = b[r];
                const double* wxr = wx + r * C;
                for (std::size_t c = 0; c < C; ++c) acc += wxr[c] * x[c];
                const double* whr = wh + r * H;
                for (std::size_t k = 0; k < H; ++k) acc += whr[k] * h_prev[k];
                z[r] = acc;
            }
            double* s = cache.aux.data() + t * stride;
            for (std::size_t k = 0; k < H; ++k) {
                const double ig = sigmoid(z[k]);
                const double fg = sigmoid(z[H + k]);
                const double gg = std::tanh(z[2 * H + k]);
                const double og = sigmoid(z[3 * H + k]);
                const double c = fg * c_prev[k] + ig * gg;
                const double tc = std::tanh(c);
                s[k] = ig;
                s[H + k] = fg;
                s[2 * H + k] = gg;
                s[3 * H + k] = og;
                s[4 * H + k] = c;
                s[5 * H + k] = og * tc;
                s[6 * H + k] = tc;
            }
            std::copy(s + 4 * H, s + 5 * H, c_prev.begin());
            std::copy(s + 5 * H, s + 6 * H, h_prev.begin());
        }

        Tensor out(output_shape());
        if (spec().return_sequences) {
            for (std::size_t t = 0; t < steps_; ++t) {
                const double* h = cache.aux.data() + t * stride + 5 * H;
                std::copy(h, h + H, out.data.begin() + static_cast<std::ptrdiff_t>(t * H));
            }
        } else if (steps_ > 0) {
            const double* h = cache.aux.data() + (steps_ - 1) * stride + 5 * H;
            std::copy(h, h + H, out.data.begin());
        }
        return out;
    }

    Tensor backward(std::span<const double> params, const LayerCache& cache, const Tensor& grad_out,
                    std::span<double> grad_params) const override {
        const std::size_t H = cells_, C = channels_, stride = 7 * H;
        const double* wx = params.data();
        const double* wh = wx + 4 * H * C;
        double* gwx = grad_params.data();
        double* gwh = gwx + 4 * H * C;
        double* gb = gwh + 4 * H * H;

        Tensor grad_in(input_shape());
        std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dz(4 * H);

        for (std::size_t step = steps_; step-- > 0;) {
            const double* s = cache.aux.data() + step * stride;
            const double* c_prev = step > 0 ? s - stride + 4 * H : nullptr;
            const double* h_prev = step > 0 ? s - stride + 5 * H : nullptr;
            for (std::size_t k = 0; k < H; ++k) {
                double dh = dh_next[k];
                if (spec().return_sequences) {
                    dh += grad_out.data[step * H + k];
                } else if (step + 1 == steps_) {
                    dh += grad_out.data[k];
                }
                const double ig = s[k], fg = s[H + k], gg = s[2 * H + k], og = s[3 * H + k];
                const double tc = s[6 * H + k];
                const double d_o = dh * tc;
                const double dc = dc_next[k] + dh * og * (1.0 - tc * tc);
                const double cp = c_prev ? c_prev[k] : 0.0;
                dz[k] = dc * gg * ig * (1.0 - ig);
                dz[H + k] = dc * cp * fg * (1.0 - fg);
                dz[2 * H + k] = dc * ig * (1.0 - gg * gg);
                dz[3 * H + k] = d_o * og * (1.0 - og);
                dc_next[k] = dc * fg;
            }

            const double* x = cache.input.data.data() + step * C;
            double* gx = grad_in.data.data() + step * C;
            std::fill(dh_next.begin(), dh_next.end(), 0.0);
            for (std::size_t r = 0; r < 4 * H; ++r) {
                const double g = dz[r];
                gb[r] += g;
                if (g == 0.0) continue;
                const double* wxr = wx + r * C;
                double* gwxr = gwx + r * C;
                for (std::size_t c = 0; c < C; ++c) {
                    gwxr[c] += g * x[c];
                    gx[c] += g * wxr[c];
                }
                const double* whr = wh + r * H;
                double* gwhr = gwh + r * H;
                for (std::size_t k = 0; k < H; ++k) {
                    if (h_prev) gwhr[k] += g * h_prev[k];
                    dh_next[k] += g * whr[k];
                }
            }
        }
        return grad_in;
    }

private:
    std::size_t steps_, channels_, cells_;
};

class Relu final : public Layer {
public:
    Relu(const LayerSpec& spec, const Shape& in) : Layer(spec, in, in) {}

    Tensor forward(std::span<const double>, const Tensor& in, LayerCache& cache,
                   const ForwardMode&) const override {
        cache.input = in;
        Tensor out = in;
        for (double& v : out.data) v = v > 0.0 ? v : 0.0;
        return out;
    }

    Tensor backward(std::span<const double>, const LayerCache& cache, const Tensor& grad_out,
                    std::span<double>) const override {
        Tensor grad_in = grad_out;
        grad_in.shape = input_shape();
        for (std::size_t i = 0; i < grad_in.size(); ++i) {
            if (!(cache.input.data[i] > 0.0)) grad_in.data[i] = 0.0;
        }
        return grad_in;
    }
};

/// Inverted dropout: kept units are scaled by 1/(1-p) at train time only.
class Dropout final : public Layer {
public:
    Dropout(const LayerSpec& spec, const Shape& in) : Layer(spec, in, in) {}

    Tensor forward(std::span<const double>, const Tensor& in, LayerCache& cache,
                   const ForwardMode& mode) const override {
        cache.aux.clear();
        const double p = spec().p;
        if (!mode.train || p == 0.0) return in;
        if (!mode.rng) throw Error("dropout in train mode requires a random stream");
        std::bernoulli_distribution keep(1.0 - p);
        const double scale = 1.0 / (1.0 - p);
        cache.aux.resize(in.size());
        Tensor out = in;
        for (std::size_t i = 0; i < in.size(); ++i) {
            cache.aux[i] = keep(*mode.rng) ? scale : 0.0;
            out.data[i] *= cache.aux[i];
        }
        return out;
    }

    Tensor backward(std::span<const double>, const LayerCache& cache, const Tensor& grad_out,
                    std::span<double>) const override {
        Tensor grad_in = grad_out;
        grad_in.shape = input_shape();
        if (!cache.aux.empty()) {
            for (std::size_t i = 0; i < grad_in.size(); ++i) grad_in.data[i] *= cache.aux[i];
        }
        return grad_in;
    }
};

/// Max over non-overlapping windows along the time axis; first maximum wins ties.
class MaxPool final : public Layer {
public:
    MaxPool(const LayerSpec& spec, const Shape& in, std::size_t length, std::size_t channels)
        : Layer(spec, in, {length / spec.pool, channels}), channels_(channels) {}

    Tensor forward(std::span<const double>, const Tensor& in, LayerCache& cache,
                   const ForwardMode&) const override {
        const std::size_t out_len = output_shape()[0], size = spec().pool;
        Tensor out(output_shape());
        cache.index.assign(out.size(), 0);
        for (std::size_t t = 0; t < out_len; ++t) {
            for (std::size_t c = 0; c < channels_; ++c) {
                std::size_t best = (t * size) * channels_ + c;
                for (std::size_t j = 1; j < size; ++j) {
                    const std::size_t idx = (t * size + j) * channels_ + c;
                    if (in.data[idx] > in.data[best]) best = idx;
                }
                out.data[t * channels_ + c] = in.data[best];
                cache.index[t * channels_ + c] = best;
            }
        }
        return out;
    }

    Tensor backward(std::span<const double>, const LayerCache& cache, const Tensor& grad_out,
                    std::span<double>) const override {
        Tensor grad_in(input_shape());
        for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in.data[cache.index[i]] += grad_out.data[i];
        return grad_in;
    }

private:
    std::size_t channels_;
};

class IdentityPool final : public Layer {
public:
    IdentityPool(const LayerSpec& spec, const Shape& in) : Layer(spec, in, in) {}

    Tensor forward(std::span<const double>, const Tensor& in, LayerCache&,
                   const ForwardMode&) const override {
        return in;
    }
    Tensor backward(std::span<const double>, const LayerCache&, const Tensor& grad_out,
                    std::span<double>) const override {
        Tensor grad_in = grad_out;
        grad_in.shape = input_shape();
        return grad_in;
    }
};

} // namespace

std::shared_ptr<const Layer> make_layer(const LayerSpec& spec, const Shape& input_shape) {
    spec.validate();
    if (input_shape.empty() || shape_size(input_shape) == 0) {
        throw Error("empty input shape " + shape_string(input_shape));
    }
    switch (spec.kind) {
    case LayerKind::dense:
        return std::make_shared<Dense>(spec, input_shape);
    case LayerKind::conv1d: {
        const Shape seq = as_sequence(input_shape);
        if (seq[0] < spec.kernel) {
            throw Error("input length " + std::to_string(seq[0]) + " shorter than kernel " +
                        std::to_string(spec.kernel));
        }
        return std::make_shared<Conv1d>(spec, input_shape, seq[0], seq[1]);
    }
    case LayerKind::lstm: {
        const Shape seq = as_sequence(input_shape);
        return std::make_shared<Lstm>(spec, input_shape, seq[0], seq[1]);
    }
    case LayerKind::relu:
        return std::make_shared<Relu>(spec, input_shape);
    case LayerKind::dropout:
        return std::make_shared<Dropout>(spec, input_shape);
    case LayerKind::maxpool: {
        const Shape seq = as_sequence(input_shape);
        if (seq[0] < spec.pool) {
            throw Error("input length " + std::to_string(seq[0]) + " shorter than pool size " +
                        std::to_string(spec.pool));
        }
        return std::make_shared<MaxPool>(spec, input_shape, seq[0], seq[1]);
    }
    case LayerKind::identity_pool:
        return std::make_shared<IdentityPool>(spec, input_shape);
    }
    throw Error("unknown layer kind");
}

Sequential::Sequential(const std::vector<LayerSpec>& specs, Shape input_shape)
    : input_shape_(std::move(input_shape)) {
    Shape shape = input_shape_;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        try {
            layers_.push_back(make_layer(specs[i], shape));
        } catch (const Error& e) {
            throw Error("layer " + std::to_string(i + 1) + " (" + to_string(specs[i].kind) +
                        "): " + e.what());
        }
        offsets_.push_back(param_count_);
        param_count_ += layers_.back()->param_count();
        shape = layers_.back()->output_shape();
    }
}

std::vector<LayerSpec> Sequential::specs() const {
    std::vector<LayerSpec> out;
    for (const auto& l : layers_) out.push_back(l->spec());
    return out;
}

void Sequential::init(std::span<double> params, Rng& rng) const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i]->init(params.subspan(offsets_[i], layers_[i]->param_count()), rng);
    }
}

Tensor Sequential::forward(std::span<const double> params, const Tensor& in,
                           SequentialCache& cache, const ForwardMode& mode) const {
    if (in.size() != shape_size(input_shape_)) {
        throw Error("input of size " + std::to_string(in.size()) + " does not match expected shape " +
                    shape_string(input_shape_));
    }
    cache.layers.resize(layers_.size());
    Tensor x = in;
    x.shape = input_shape_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        x = layers_[i]->forward(params.subspan(offsets_[i], layers_[i]->param_count()), x,
                                cache.layers[i], mode);
    }
    return x;
}

Tensor Sequential::backward(std::span<const double> params, const SequentialCache& cache,
                            const Tensor& grad_out, std::span<double> grad_params) const {
    if (cache.layers.size() != layers_.size()) throw Error("cache does not match this network");
    Tensor g = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const auto n = layers_[i]->param_count();
        g = layers_[i]->backward(params.subspan(offsets_[i], n), cache.layers[i], g,
                                 grad_params.subspan(offsets_[i], n));
    }
    return g;
}

} // namespace trendlab::nn

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace trendlab::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string shape_string(const Shape& shape);

/// Dense row-major double tensor. Sequences are [time, channels].
struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s) : shape(std::move(s)), data(shape_size(shape), 0.0) {}
    Tensor(Shape s, std::vector<double> d);

    static Tensor vector(std::vector<double> d) {
        const std::size_t n = d.size();
        return Tensor({n}, std::move(d));
    }

    std::size_t size() const noexcept { return data.size(); }
    std::size_t rank() const noexcept { return shape.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    /// Element (t, c) of a rank-2 tensor.
    double& at(std::size_t t, std::size_t c) { return data[t * shape[1] + c]; }
    double at(std::size_t t, std::size_t c) const { return data[t * shape[1] + c]; }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

} // namespace trendlab::nn

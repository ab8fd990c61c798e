// Copyright 2026 The GNSS Sentinel Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gnss/cnn/tensor.hpp"
#include "gnss/core/rng.hpp"

namespace gnss::cnn {

/// A trainable array and its gradient accumulator.
template <class T>
struct ParamRef {
    std::string name;
    std::vector<T>* value;
    std::vector<T>* grad;
};

/// Non-trainable state (BN running statistics).
template <class T>
struct BufferRef {
    std::string name;
    std::vector<T>* value;
};

/// 2-d convolution, square kernel, zero padding. Weights (cout, cin, k, k).
template <class T>
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride, std::size_t pad,
           bool bias);

    std::size_t in_channels = 0, out_channels = 0, kernel = 1, stride = 1, pad = 0;
    bool has_bias = false;
    std::vector<T> weight, bias, grad_weight, grad_bias;

    std::size_t out_extent(std::size_t in) const noexcept { return (in + 2 * pad - kernel) / stride + 1; }
    std::size_t parameter_count() const noexcept { return weight.size() + bias.size(); }
    /// He-normal weights, zero bias.
    void init(Rng& rng);

    Tensor<T> forward(const Tensor<T>& x);
    /// Accumulates parameter gradients and returns dL/dx.
    Tensor<T> backward(const Tensor<T>& dy);
    void collect(const std::string& prefix, std::vector<ParamRef<T>>& out);

private:
    Tensor<T> input_;
};

/// Per-channel batch normalization over (n, h, w).
template <class T>
class BatchNorm2d {
public:
    BatchNorm2d() = default;
    explicit BatchNorm2d(std::size_t channels, double momentum = 0.1, double eps = 1e-5);

    std::size_t channels = 0;
    double momentum = 0.1;
    double eps = 1e-5;
    std::vector<T> gamma, beta, grad_gamma, grad_beta;
    std::vector<T> running_mean, running_var;

    std::size_t parameter_count() const noexcept { return gamma.size() + beta.size(); }

    /// Training mode normalizes with batch statistics (biased variance) and
    /// updates the running estimates with the unbiased variance.
    Tensor<T> forward(const Tensor<T>& x, bool training);
    Tensor<T> backward(const Tensor<T>& dy);
    void collect(const std::string& prefix, std::vector<ParamRef<T>>& out);
    void collect_buffers(const std::string& prefix, std::vector<BufferRef<T>>& out);

private:
    Tensor<T> xhat_;
    std::vector<double> inv_std_;
    bool trained_pass_ = false;
};

template <class T>
class Relu {
public:
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& dy);

private:
    Tensor<T> output_;
};

/// (n, c, h, w) -> (n, c, 1, 1) spatial mean.
template <class T>
class GlobalAvgPool {
public:
    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& dy);

private:
    std::size_t h_ = 0, w_ = 0;
};

/// Fully connected layer on (n, d, 1, 1). Weights (out, in).
template <class T>
class Linear {
public:
    Linear() = default;
    Linear(std::size_t in_features, std::size_t out_features);

    std::size_t in_features = 0, out_features = 0;
    std::vector<T> weight, bias, grad_weight, grad_bias;

    std::size_t parameter_count() const noexcept { return weight.size() + bias.size(); }
    /// Uniform(-1/sqrt(in), 1/sqrt(in)) weights, zero bias.
    void init(Rng& rng);

    Tensor<T> forward(const Tensor<T>& x);
    Tensor<T> backward(const Tensor<T>& dy);
    void collect(const std::string& prefix, std::vector<ParamRef<T>>& out);

private:
    Tensor<T> input_;
};

/// conv3x3 -> BN -> ReLU -> conv3x3 -> BN, plus skip, then ReLU. The skip is
/// a bias-free 1x1 convolution when the stride or channel count changes.
template <class T>
class ResidualBlock {
public:
    ResidualBlock() = default;
    ResidualBlock(std::size_t in_channels, std::size_t out_channels, std::size_t stride);

    Conv2d<T> conv1, conv2;
    BatchNorm2d<T> bn1, bn2;
    Relu<T> relu1, relu_out;
    bool has_projection = false;
    Conv2d<T> projection;

    std::size_t parameter_count() const noexcept;
    void init(Rng& rng);

    Tensor<T> forward(const Tensor<T>& x, bool training);
    Tensor<T> backward(const Tensor<T>& dy);
    void collect(const std::string& prefix, std::vector<ParamRef<T>>& out);
    void collect_buffers(const std::string& prefix, std::vector<BufferRef<T>>& out);
};

/// Mean softmax cross-entropy over the rows of (n, K, 1, 1) logits. Writes
/// dL/dlogits into `grad` when non-null. Throws DataError on a bad label.
template <class T>
double softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels, Tensor<T>* grad);

}  // namespace gnss::cnn

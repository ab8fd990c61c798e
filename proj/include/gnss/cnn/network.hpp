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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnss/cnn/layers.hpp"
#include "json.hpp"

namespace gnss::cnn {

struct StageSpec {
    std::size_t channels = 16;
    std::size_t blocks = 1;
};

/// Stem conv3x3 + ReLU, residual stages (stride 2 on the first block of
/// every stage after the first), global average pool, linear head.
struct CnnArch {
    std::size_t in_channels = 1;
    std::size_t input_height = 64;
    std::size_t input_width = 64;
    std::size_t stem_channels = 16;
    std::vector<StageSpec> stages{{16, 1}, {32, 1}, {64, 1}};
    std::size_t n_classes = 6;

    std::size_t embedding_dim() const noexcept { return stages.empty() ? stem_channels : stages.back().channels; }

    /// Small default for laptop-scale runs.
    static CnnArch desk();
    /// A guessed ~6M-parameter ResNet-style layout for full-data runs.
    static CnnArch full_scale_guess();
};

void validate(const CnnArch& arch);
/// Closed-form parameter count of `arch`.
std::size_t analytic_parameter_count(const CnnArch& arch);
nlohmann::json to_json(const CnnArch& arch);
CnnArch arch_from_json(const nlohmann::json& j);

template <class T>
class Network {
public:
    Network() = default;
    explicit Network(const CnnArch& arch);

    CnnArch arch;
    Conv2d<T> stem;
    Relu<T> stem_relu;
    std::vector<ResidualBlock<T>> blocks;
    GlobalAvgPool<T> pool;
    Linear<T> head;

    /// Deterministic initialization from `seed`.
    void init(std::uint64_t seed);
    std::size_t parameter_count() const;

    /// (n, in_channels, H, W) -> (n, K, 1, 1) logits. The pooled
    /// embedding of the last call is kept in features().
    Tensor<T> forward(const Tensor<T>& images, bool training);
    /// Back-propagates dL/dlogits through the last forward pass.
    void backward(const Tensor<T>& dlogits);
    const Tensor<T>& features() const noexcept { return features_; }

    void zero_grad();
    std::vector<ParamRef<T>> params();
    std::vector<BufferRef<T>> buffers();

    /// Mean cross-entropy of a training-mode pass; gradients are zeroed and
    /// then filled for every parameter.
    double loss_and_grad(const Tensor<T>& images, std::span<const int> labels);

private:
    Tensor<T> features_;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace gnss::cnn

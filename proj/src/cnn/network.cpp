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

#include "gnss/cnn/network.hpp"

#include "gnss/core/error.hpp"
#include "gnss/core/rng.hpp"

namespace gnss::cnn {

CnnArch CnnArch::desk() { return CnnArch{}; }

CnnArch CnnArch::full_scale_guess() {
    CnnArch a;
    a.input_height = 128;
    a.input_width = 128;
    a.stem_channels = 64;
    a.stages = {{64, 2}, {128, 2}, {256, 2}, {512, 1}};
    return a;
}

void validate(const CnnArch& a) {
    if (a.in_channels == 0 || a.stem_channels == 0) throw UsageError("cnn arch: channel counts must be positive");
    if (a.input_height == 0 || a.input_width == 0) throw UsageError("cnn arch: input size must be positive");
    if (a.n_classes < 2) throw UsageError("cnn arch: need at least two classes");
    for (const auto& s : a.stages)
        if (s.channels == 0 || s.blocks == 0) throw UsageError("cnn arch: every stage needs channels and blocks");
}

std::size_t analytic_parameter_count(const CnnArch& a) {
    std::size_t total = a.in_channels * a.stem_channels * 9 + a.stem_channels;
    std::size_t c = a.stem_channels;
    for (std::size_t s = 0; s < a.stages.size(); ++s) {
        const std::size_t o = a.stages[s].channels;
        for (std::size_t b = 0; b < a.stages[s].blocks; ++b) {
            const bool strided = s > 0 && b == 0;
            total += c * o * 9 + o * o * 9 + 4 * o;
            if (strided || c != o) total += c * o;
            c = o;
        }
    }
    return total + c * a.n_classes + a.n_classes;
}

nlohmann::json to_json(const CnnArch& a) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : a.stages) stages.push_back({{"channels", s.channels}, {"blocks", s.blocks}});
    return {{"in_channels", a.in_channels},     {"input_height", a.input_height}, {"input_width", a.input_width},
            {"stem_channels", a.stem_channels}, {"stages", stages},               {"n_classes", a.n_classes}};
}

CnnArch arch_from_json(const nlohmann::json& j) {
    CnnArch a;
    a.in_channels = j.value("in_channels", a.in_channels);
    a.input_height = j.value("input_height", a.input_height);
    a.input_width = j.value("input_width", a.input_width);
    a.stem_channels = j.value("stem_channels", a.stem_channels);
    a.n_classes = j.value("n_classes", a.n_classes);
    if (j.contains("stages")) {
        a.stages.clear();
        for (const auto& s : j.at("stages"))
            a.stages.push_back({s.at("channels").get<std::size_t>(), s.value("blocks", std::size_t{1})});
    }
    validate(a);
    return a;
}

template <class T>
Network<T>::Network(const CnnArch& a) : arch(a), stem(a.in_channels, a.stem_channels, 3, 1, 1, true) {
    validate(a);
    std::size_t c = a.stem_channels;
    for (std::size_t s = 0; s < a.stages.size(); ++s)
        for (std::size_t b = 0; b < a.stages[s].blocks; ++b) {
            blocks.emplace_back(c, a.stages[s].channels, (s > 0 && b == 0) ? 2 : 1);
            c = a.stages[s].channels;
        }
    head = Linear<T>(c, a.n_classes);
}

template <class T>
void Network<T>::init(std::uint64_t seed) {
    Rng stem_rng(derive_seed(seed, "cnn_init", 0));
    stem.init(stem_rng);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        Rng rng(derive_seed(seed, "cnn_init", b + 1));
        blocks[b].init(rng);
    }
    Rng head_rng(derive_seed(seed, "cnn_init", blocks.size() + 1));
    head.init(head_rng);
}

template <class T>
std::size_t Network<T>::parameter_count() const {
    std::size_t n = stem.parameter_count() + head.parameter_count();
    for (const auto& b : blocks) n += b.parameter_count();
    return n;
}

template <class T>
Tensor<T> Network<T>::forward(const Tensor<T>& images, bool training) {
    if (images.c != arch.in_channels || images.h != arch.input_height || images.w != arch.input_width)
        throw DataError("cnn forward: expected (n," + std::to_string(arch.in_channels) + "," +
                        std::to_string(arch.input_height) + "," + std::to_string(arch.input_width) + ") images, got " +
                        images.shape_string());
    if (images.n == 0) throw DataError("cnn forward: empty batch");
    Tensor<T> x = stem_relu.forward(stem.forward(images));
    for (auto& b : blocks) x = b.forward(x, training);
    features_ = pool.forward(x);
    return head.forward(features_);
}

template <class T>
void Network<T>::backward(const Tensor<T>& dlogits) {
    Tensor<T> g = pool.backward(head.backward(dlogits));
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) g = it->backward(g);
    stem.backward(stem_relu.backward(g));
}

template <class T>
void Network<T>::zero_grad() {
    for (auto& p : params()) std::fill(p.grad->begin(), p.grad->end(), T(0));
}

template <class T>
std::vector<ParamRef<T>> Network<T>::params() {
    std::vector<ParamRef<T>> out;
    stem.collect("stem", out);
    for (std::size_t b = 0; b < blocks.size(); ++b) blocks[b].collect("block" + std::to_string(b), out);
    head.collect("head", out);
    return out;
}

template <class T>
std::vector<BufferRef<T>> Network<T>::buffers() {
    std::vector<BufferRef<T>> out;
    for (std::size_t b = 0; b < blocks.size(); ++b) blocks[b].collect_buffers("block" + std::to_string(b), out);
    return out;
}

template <class T>
double Network<T>::loss_and_grad(const Tensor<T>& images, std::span<const int> labels) {
    zero_grad();
    const Tensor<T> logits = forward(images, true);
    Tensor<T> dlogits;
    const double loss = softmax_cross_entropy(logits, labels, &dlogits);
    backward(dlogits);
    return loss;
}

template class Network<float>;
template class Network<double>;

}  // namespace gnss::cnn

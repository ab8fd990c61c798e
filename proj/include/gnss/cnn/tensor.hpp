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
#include <string>
#include <vector>

namespace gnss::cnn {

/// Dense NCHW tensor. Matrices are stored as (n, d, 1, 1).
template <class T>
struct Tensor {
    std::size_t n = 0, c = 0, h = 0, w = 0;
    std::vector<T> data;

    Tensor() = default;
    Tensor(std::size_t n_, std::size_t c_, std::size_t h_, std::size_t w_, T fill = T(0))
        : n(n_), c(c_), h(h_), w(w_), data(n_ * c_ * h_ * w_, fill) {}

    std::size_t size() const noexcept { return data.size(); }
    std::size_t sample_size() const noexcept { return c * h * w; }
    T* sample(std::size_t i) noexcept { return data.data() + i * sample_size(); }
    const T* sample(std::size_t i) const noexcept { return data.data() + i * sample_size(); }
    T& at(std::size_t i, std::size_t ch, std::size_t y, std::size_t x) noexcept {
        return data[((i * c + ch) * h + y) * w + x];
    }
    T at(std::size_t i, std::size_t ch, std::size_t y, std::size_t x) const noexcept {
        return data[((i * c + ch) * h + y) * w + x];
    }
    bool same_shape(const Tensor& o) const noexcept { return n == o.n && c == o.c && h == o.h && w == o.w; }
    std::string shape_string() const {
        return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
               std::to_string(w) + ")";
    }
};

}  // namespace gnss::cnn

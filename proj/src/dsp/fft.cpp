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

#include "gnss/dsp/fft.hpp"

#include <cmath>
#include <numbers>

#include "gnss/core/error.hpp"

namespace gnss::dsp {

namespace {

void transform(std::span<std::complex<double>> a, double sign) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) throw UsageError("fft: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const std::size_t half = len / 2;
        // Twiddles computed directly per index; the recurrence w *= w_len
        // accumulates error at large N.
        for (std::size_t k = 0; k < half; ++k) {
            const std::complex<double> w(std::cos(angle * static_cast<double>(k)),
                                         std::sin(angle * static_cast<double>(k)));
            for (std::size_t i = 0; i < n; i += len) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + half] * w;
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

}  // namespace

void fft_inplace(std::span<std::complex<double>> data) { transform(data, -1.0); }

void ifft_inplace(std::span<std::complex<double>> data) { transform(data, +1.0); }

}  // namespace gnss::dsp

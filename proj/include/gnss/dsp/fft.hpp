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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace gnss::dsp {

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 FFT, unnormalized forward transform
/// X[k] = sum_n x[n] exp(-2 pi i k n / N). Size must be a power of two.
void fft_inplace(std::span<std::complex<double>> data);

/// Unnormalized inverse (conjugate-exponent) transform; divide by N to invert.
void ifft_inplace(std::span<std::complex<double>> data);

/// Reorders bins so index 0 holds the most negative frequency (-fs/2).
template <typename T>
std::vector<T> fftshift(std::span<const T> bins) {
    const std::size_t n = bins.size();
    std::vector<T> out(n);
    const std::size_t half = n / 2;
    for (std::size_t k = 0; k < n; ++k) out[(k + half) % n] = bins[k];
    return out;
}

}  // namespace gnss::dsp

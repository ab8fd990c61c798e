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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "gnss/synth/signal_synth.hpp"

namespace gnss::spectro {

enum class Window { Rectangular, Hann };

std::string_view to_string(Window w) noexcept;
Window window_from_string(std::string_view name);

struct StftConfig {
    std::size_t n_fft = 256;
    std::size_t hop = 128;
    Window window = Window::Hann;
};

void validate(const StftConfig& config);

/// Additive floor inside the logarithm: every entry is >= 10 log10(kPowerFloor).
inline constexpr double kPowerFloor = 1e-12;

/// Time-frequency grid of dB power, row-major frames x n_fft. Columns are
/// fft-shifted: column 0 is -fs/2, column n_fft/2 is DC.
struct Spectrogram {
    std::vector<double> grid;
    std::size_t frames = 0;
    std::size_t bins = 0;
    StftConfig config{};
    double sample_rate_hz = 0.0;

    double at(std::size_t frame, std::size_t bin) const { return grid[frame * bins + bin]; }
    /// Centre frequency of a shifted column.
    double bin_frequency(std::size_t bin) const;
};

std::size_t frame_count(std::size_t signal_length, const StftConfig& config);
std::vector<double> make_window(Window w, std::size_t n);

Spectrogram stft(std::span<const std::complex<double>> samples, double sample_rate_hz, const StftConfig& config);
Spectrogram stft(const synth::IqSignal& signal, const StftConfig& config);

/// 8-bit image, row-major height x width. Rows follow frames (time) and
/// columns follow frequency, matching the grid layout.
struct SpectrogramImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;
    double min_db = 0.0;  // extrema of the source grid
    double max_db = 0.0;

    std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

/// Resamples a row-major real grid with a triangle (bilinear) kernel.
/// Sample centres sit at half-pixel positions; when shrinking, the kernel
/// support widens by the scale factor so every source cell contributes.
/// Identity size is an exact copy.
std::vector<double> resize_bilinear(std::span<const double> src, std::size_t src_h, std::size_t src_w,
                                    std::size_t dst_h, std::size_t dst_w);

/// Bilinear resize to height x width, then per-image min/max to 0/255.
/// A constant result maps to all-zero pixels.
SpectrogramImage to_image(const Spectrogram& spec, std::size_t width, std::size_t height);

/// Binary PGM (P5, maxval 255).
void write_pgm(const std::filesystem::path& path, const SpectrogramImage& image);
SpectrogramImage read_pgm(const std::filesystem::path& path);

/// One CSV row per frame.
void write_grid_csv(const std::filesystem::path& path, const Spectrogram& spec);

}  // namespace gnss::spectro

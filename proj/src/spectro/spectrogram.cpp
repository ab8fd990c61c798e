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

#include "gnss/spectro/spectrogram.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "gnss/core/error.hpp"
#include "gnss/dsp/fft.hpp"

namespace gnss::spectro {

std::string_view to_string(Window w) noexcept { return w == Window::Hann ? "hann" : "rectangular"; }

Window window_from_string(std::string_view name) {
    if (name == "hann" || name == "Hann") return Window::Hann;
    if (name == "rectangular" || name == "Rectangular" || name == "rect") return Window::Rectangular;
    throw UsageError("unknown window '" + std::string(name) + "'; valid: hann, rectangular");
}

void validate(const StftConfig& c) {
    if (c.n_fft < 8 || !dsp::is_power_of_two(c.n_fft)) throw UsageError("stft: n_fft must be a power of two >= 8");
    if (c.hop == 0 || c.hop > c.n_fft) throw UsageError("stft: hop must lie in [1, n_fft]");
}

double Spectrogram::bin_frequency(std::size_t bin) const {
    return (static_cast<double>(bin) - static_cast<double>(bins / 2)) * sample_rate_hz / static_cast<double>(bins);
}

std::size_t frame_count(std::size_t len, const StftConfig& c) {
    return len < c.n_fft ? 0 : (len - c.n_fft) / c.hop + 1;
}

std::vector<double> make_window(Window w, std::size_t n) {
    std::vector<double> out(n, 1.0);
    if (w == Window::Hann) {
        // Periodic Hann, the usual choice for spectral analysis.
        for (std::size_t i = 0; i < n; ++i)
            out[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
    return out;
}

Spectrogram stft(std::span<const std::complex<double>> samples, double fs, const StftConfig& config) {
    validate(config);
    if (samples.size() < config.n_fft)
        throw DataError("stft: signal of " + std::to_string(samples.size()) + " samples is shorter than n_fft " +
                        std::to_string(config.n_fft));
    Spectrogram spec;
    spec.config = config;
    spec.sample_rate_hz = fs;
    spec.bins = config.n_fft;
    spec.frames = frame_count(samples.size(), config);
    spec.grid.resize(spec.frames * spec.bins);

    const auto window = make_window(config.window, config.n_fft);
    const std::size_t half = config.n_fft / 2;
    std::vector<std::complex<double>> buf(config.n_fft);
    for (std::size_t t = 0; t < spec.frames; ++t) {
        const std::size_t start = t * config.hop;
        for (std::size_t i = 0; i < config.n_fft; ++i) buf[i] = samples[start + i] * window[i];
        dsp::fft_inplace(buf);
        double* row = spec.grid.data() + t * spec.bins;
        for (std::size_t k = 0; k < config.n_fft; ++k)
            row[(k + half) % config.n_fft] = 10.0 * std::log10(std::norm(buf[k]) + kPowerFloor);
    }
    return spec;
}

Spectrogram stft(const synth::IqSignal& signal, const StftConfig& config) {
    return stft(signal.samples, signal.sample_rate_hz, config);
}

namespace {

struct Tap {
    std::size_t index;
    double weight;
};

// Per-output triangle-kernel taps along one axis, normalized to unit sum.
std::vector<std::vector<Tap>> axis_taps(std::size_t src, std::size_t dst) {
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    const double support = std::max(1.0, scale);
    std::vector<std::vector<Tap>> taps(dst);
    for (std::size_t o = 0; o < dst; ++o) {
        const double centre = (static_cast<double>(o) + 0.5) * scale;
        const auto lo = static_cast<long long>(std::floor(centre - support));
        const auto hi = static_cast<long long>(std::ceil(centre + support));
        double total = 0.0;
        for (long long i = std::max(lo, 0LL); i < std::min(hi + 1, static_cast<long long>(src)); ++i) {
            const double d = std::abs((static_cast<double>(i) + 0.5 - centre) / support);
            const double w = 1.0 - d;
            if (w > 0.0) {
                taps[o].push_back({static_cast<std::size_t>(i), w});
                total += w;
            }
        }
        if (taps[o].empty()) {
            const auto nearest = std::min<std::size_t>(static_cast<std::size_t>(centre), src - 1);
            taps[o].push_back({nearest, 1.0});
            total = 1.0;
        }
        for (auto& tap : taps[o]) tap.weight /= total;
    }
    return taps;
}

}  // namespace

std::vector<double> resize_bilinear(std::span<const double> src, std::size_t src_h, std::size_t src_w,
                                    std::size_t dst_h, std::size_t dst_w) {
    if (src_h == 0 || src_w == 0 || src.size() != src_h * src_w) throw DataError("resize: empty or ragged grid");
    if (dst_h == 0 || dst_w == 0) throw UsageError("resize: target dimensions must be >= 1");
    const auto col_taps = axis_taps(src_w, dst_w);
    const auto row_taps = axis_taps(src_h, dst_h);
    std::vector<double> horiz(src_h * dst_w, 0.0);
    for (std::size_t r = 0; r < src_h; ++r)
        for (std::size_t c = 0; c < dst_w; ++c) {
            double acc = 0.0;
            for (const auto& t : col_taps[c]) acc += t.weight * src[r * src_w + t.index];
            horiz[r * dst_w + c] = acc;
        }
    std::vector<double> out(dst_h * dst_w, 0.0);
    for (std::size_t r = 0; r < dst_h; ++r)
        for (std::size_t c = 0; c < dst_w; ++c) {
            double acc = 0.0;
            for (const auto& t : row_taps[r]) acc += t.weight * horiz[t.index * dst_w + c];
            out[r * dst_w + c] = acc;
        }
    return out;
}

SpectrogramImage to_image(const Spectrogram& spec, std::size_t width, std::size_t height) {
    if (spec.frames == 0 || spec.bins == 0 || spec.grid.empty()) throw DataError("to_image: empty spectrogram");
    if (width == 0 || height == 0) throw UsageError("to_image: width and height must be >= 1");
    SpectrogramImage img;
    img.width = width;
    img.height = height;
    const auto [mn, mx] = std::minmax_element(spec.grid.begin(), spec.grid.end());
    img.min_db = *mn;
    img.max_db = *mx;

    const auto resized = resize_bilinear(spec.grid, spec.frames, spec.bins, height, width);
    const auto [rmn, rmx] = std::minmax_element(resized.begin(), resized.end());
    const double lo = *rmn;
    const double range = *rmx - lo;
    img.pixels.assign(width * height, 0);
    // Decide constancy on the source grid; resampling a constant grid can
    // leave rounding-level ripple.
    if (img.max_db > img.min_db && range > 0.0) {
        for (std::size_t i = 0; i < resized.size(); ++i) {
            const double v = std::round(255.0 * (resized[i] - lo) / range);
            img.pixels[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    }
    return img;
}

void write_pgm(const std::filesystem::path& path, const SpectrogramImage& image) {
    if (image.pixels.size() != image.width * image.height) throw DataError("write_pgm: pixel count mismatch");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write PGM: " + path.string());
    out << "P5 " << image.width << ' ' << image.height << " 255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw DataError("short write on PGM: " + path.string());
}

SpectrogramImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open PGM: " + path.string());
    auto next_token = [&in]() {
        std::string tok;
        char c;
        while (in.get(c)) {
            if (c == '#') {
                std::string skip;
                std::getline(in, skip);
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!tok.empty()) break;
                continue;
            }
            tok.push_back(c);
        }
        return tok;
    };
    if (next_token() != "P5") throw DataError("not a binary PGM (P5): " + path.string());
    SpectrogramImage img;
    try {
        img.width = std::stoul(next_token());
        img.height = std::stoul(next_token());
        if (std::stoul(next_token()) != 255) throw DataError("PGM maxval must be 255: " + path.string());
    } catch (const std::logic_error&) {
        throw DataError("malformed PGM header: " + path.string());
    }
    img.pixels.resize(img.width * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) throw DataError("truncated PGM: " + path.string());
    return img;
}

void write_grid_csv(const std::filesystem::path& path, const Spectrogram& spec) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write grid CSV: " + path.string());
    out << std::setprecision(10);
    for (std::size_t t = 0; t < spec.frames; ++t) {
        for (std::size_t k = 0; k < spec.bins; ++k) {
            if (k) out << ',';
            out << spec.at(t, k);
        }
        out << '\n';
    }
}

}  // namespace gnss::spectro

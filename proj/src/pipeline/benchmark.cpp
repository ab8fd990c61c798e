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

#include "gnss/pipeline/benchmark.hpp"

#include "gnss/core/error.hpp"
#include "gnss/core/parallel.hpp"
#include "gnss/core/rng.hpp"

namespace gnss::pipeline {

double signal_duration(const JammingSetConfig& c) {
    if (c.frames == 0) throw UsageError("jamming set: frames must be positive");
    const std::size_t n = (c.frames - 1) * c.stft.hop + c.stft.n_fft;
    return static_cast<double>(n) / c.sample_rate_hz;
}

nlohmann::json to_json(const JammingSetConfig& c) {
    return {{"per_class", c.per_class},
            {"sample_rate_hz", c.sample_rate_hz},
            {"frames", c.frames},
            {"n_fft", c.stft.n_fft},
            {"hop", c.stft.hop},
            {"window", std::string(spectro::to_string(c.stft.window))},
            {"image_size", c.image_size},
            {"jsr_min_db", c.ranges.jsr_min_db},
            {"jsr_max_db", c.ranges.jsr_max_db}};
}

JammingSetConfig jamming_set_from_json(const nlohmann::json& j, JammingSetConfig c) {
    c.per_class = j.value("per_class", c.per_class);
    c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
    c.frames = j.value("frames", c.frames);
    c.stft.n_fft = j.value("n_fft", c.stft.n_fft);
    c.stft.hop = j.value("hop", c.stft.hop);
    if (j.contains("window")) c.stft.window = spectro::window_from_string(j.at("window").get<std::string>());
    c.image_size = j.value("image_size", c.image_size);
    c.ranges.jsr_min_db = j.value("jsr_min_db", c.ranges.jsr_min_db);
    c.ranges.jsr_max_db = j.value("jsr_max_db", c.ranges.jsr_max_db);
    spectro::validate(c.stft);
    if (c.per_class == 0 || c.image_size == 0 || c.frames == 0)
        throw UsageError("jamming set: per_class, frames and image_size must be positive");
    if (!(c.sample_rate_hz > 0.0)) throw UsageError("jamming set: sample_rate_hz must be positive");
    if (c.ranges.jsr_min_db > c.ranges.jsr_max_db) throw UsageError("jamming set: jsr_min_db exceeds jsr_max_db");
    return c;
}

std::uint64_t jamming_signal_seed(std::uint64_t master, synth::JamClass cls, std::size_t index) {
    return derive_seed(derive_seed(master, "synth", static_cast<std::uint64_t>(cls)), index);
}

synth::IqSignal make_jamming_signal(const JammingSetConfig& c, synth::JamClass cls, std::size_t index,
                                    std::uint64_t master, double* jsr_db) {
    const std::uint64_t seed = jamming_signal_seed(master, cls, index);
    Rng prng(derive_seed(seed, "params"));
    const auto params = synth::random_params(cls, c.sample_rate_hz, signal_duration(c), c.ranges, prng);
    if (jsr_db) *jsr_db = params.jsr_db;
    return synth::synth_signal(cls, params, seed);
}

spectro::SpectrogramImage jamming_image(const JammingSetConfig& c, const synth::IqSignal& signal) {
    return spectro::to_image(spectro::stft(signal, c.stft), c.image_size, c.image_size);
}

std::vector<std::string> jam_class_names() {
    std::vector<std::string> out;
    for (auto c : synth::kAllJamClasses) out.emplace_back(synth::to_string(c));
    return out;
}

cnn::ImageSet make_jamming_images(const JammingSetConfig& c, std::uint64_t master) {
    cnn::ImageSet set;
    set.height = set.width = c.image_size;
    set.class_names = jam_class_names();
    const std::size_t total = c.per_class * synth::kJamClassCount, sz = c.image_size * c.image_size;
    set.pixels.assign(total * sz, 0.0f);
    set.labels.assign(total, 0);
    parallel_for(total, [&](std::size_t i) {
        const auto cls = synth::kAllJamClasses[i / c.per_class];
        const auto img = jamming_image(c, make_jamming_signal(c, cls, i % c.per_class, master));
        std::copy(img.pixels.begin(), img.pixels.end(), set.pixels.begin() + static_cast<std::ptrdiff_t>(i * sz));
        set.labels[i] = static_cast<int>(cls);
    });
    return set;
}

}  // namespace gnss::pipeline

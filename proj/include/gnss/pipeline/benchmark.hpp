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

#include "gnss/cnn/train.hpp"
#include "gnss/spectro/spectrogram.hpp"
#include "gnss/synth/signal_synth.hpp"
#include "json.hpp"

namespace gnss::pipeline {

/// Randomized jamming image set: per_class signals of every class, each
/// drawn with random_params, turned into an STFT and resized to image_size.
struct JammingSetConfig {
    std::size_t per_class = 600;
    double sample_rate_hz = 10e6;
    std::size_t frames = 128;  // signal length = (frames - 1) * hop + n_fft
    spectro::StftConfig stft{};
    std::size_t image_size = 64;
    synth::RandomizationRanges ranges{};
};

double signal_duration(const JammingSetConfig& c);
nlohmann::json to_json(const JammingSetConfig& c);
JammingSetConfig jamming_set_from_json(const nlohmann::json& j, JammingSetConfig base = {});

/// Seed of signal `index` of class `cls`; the parameter draw uses a stream
/// derived from it.
std::uint64_t jamming_signal_seed(std::uint64_t master, synth::JamClass cls, std::size_t index);
synth::IqSignal make_jamming_signal(const JammingSetConfig& c, synth::JamClass cls, std::size_t index,
                                    std::uint64_t master, double* jsr_db = nullptr);
spectro::SpectrogramImage jamming_image(const JammingSetConfig& c, const synth::IqSignal& signal);

/// Class-major order: all NoJam images, then SingleAM, ...
cnn::ImageSet make_jamming_images(const JammingSetConfig& c, std::uint64_t master);

std::vector<std::string> jam_class_names();

}  // namespace gnss::pipeline

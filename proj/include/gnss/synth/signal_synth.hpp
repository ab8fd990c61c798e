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

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gnss/core/rng.hpp"

namespace gnss::synth {

/// Jamming classes with stable integer codes 0..5.
enum class JamClass : std::uint8_t { NoJam = 0, SingleAM = 1, SingleChirp = 2, SingleFM = 3, NB = 4, DME = 5 };

inline constexpr int kJamClassCount = 6;
inline constexpr std::array<JamClass, kJamClassCount> kAllJamClasses{
    JamClass::NoJam, JamClass::SingleAM, JamClass::SingleChirp, JamClass::SingleFM, JamClass::NB, JamClass::DME};

std::string_view to_string(JamClass c) noexcept;
std::optional<JamClass> parse_jam_class(std::string_view name) noexcept;
/// Throws UsageError listing the valid names.
JamClass jam_class_from_string(std::string_view name);
JamClass jam_class_from_code(int code);

struct AmParams {
    double carrier_offset_hz;
    double mod_index;  // in (0, 1]
    double mod_rate_hz;
};

struct ChirpParams {
    double f_start_hz;
    double f_end_hz;
    double sweep_period_s;
};

struct FmParams {
    double carrier_offset_hz;
    double freq_dev_hz;
    double mod_rate_hz;
};

struct NbParams {
    double center_hz;
    double bandwidth_hz;
};

struct DmeParams {
    double pulse_pair_spacing_s;
    double pulse_width_s;  // full width at half amplitude of each Gaussian pulse
    double pair_rate_hz;   // mean of the Poisson pair-arrival process
};

/// GNSS-like BPSK spreading sequence present in the NoJam class.
struct GnssParams {
    double chip_rate_hz;
    double power_db;  // relative to the unit noise floor
};

struct SynthParams {
    double duration_s = 1e-3;
    double sample_rate_hz = 10e6;
    double jsr_db = 0.0;
    AmParams am{};
    ChirpParams chirp{};
    FmParams fm{};
    NbParams nb{};
    DmeParams dme{};
    GnssParams gnss{};

    /// Default per-class parameters for a given sample rate and duration:
    /// AM index 0.8 at 1 kHz, full-band chirp with 1 ms period, FM deviation
    /// of 5% of fs, DME X-channel pulse pairs (12 us spacing, 3.5 us width).
    static SynthParams defaults(double sample_rate_hz, double duration_s, double jsr_db = 0.0);
};

/// Throws UsageError when the record used by `cls` is inconsistent.
void validate(JamClass cls, const SynthParams& params);

std::size_t sample_count(const SynthParams& params);

struct IqSignal {
    std::vector<std::complex<double>> samples;
    double sample_rate_hz = 0.0;
    JamClass label = JamClass::NoJam;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return samples.size(); }
    double mean_power() const noexcept;
};

/// Jammer waveform at the configured JSR plus unit-power complex white
/// Gaussian noise. Deterministic in (cls, params, seed).
IqSignal synth_signal(JamClass cls, const SynthParams& params, std::uint64_t seed);

/// The same jammer waveform without the noise term, so that
/// synth_signal(c, p, s) - jammer_only(c, p, s) is exactly the noise.
/// For NoJam this is the -20 dB BPSK sequence alone.
IqSignal jammer_only(JamClass cls, const SynthParams& params, std::uint64_t seed);

/// Unit-power circular complex Gaussian noise.
std::vector<std::complex<double>> complex_noise(std::size_t n, Rng& rng);

/// 64-tap Hamming-windowed complex bandpass used for the NB class.
std::vector<std::complex<double>> nb_bandpass_taps(double center_hz, double bandwidth_hz, double sample_rate_hz);

/// Ranges used to draw random per-class parameters for benchmark datasets.
struct RandomizationRanges {
    double jsr_min_db = 0.0;
    double jsr_max_db = 10.0;
};

/// Draws a parameter set with random jammer settings for class `cls`.
SynthParams random_params(JamClass cls, double sample_rate_hz, double duration_s, const RandomizationRanges& ranges,
                          Rng& rng);

}  // namespace gnss::synth

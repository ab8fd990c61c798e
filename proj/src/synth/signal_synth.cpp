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

#include "gnss/synth/signal_synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "gnss/core/error.hpp"

namespace gnss::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kNbTaps = 64;

constexpr std::array<std::string_view, kJamClassCount> kNames{"NoJam", "SingleAM", "SingleChirp",
                                                              "SingleFM", "NB", "DME"};

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw UsageError("synth: " + msg);
}

void require_in_band(double f, double nyquist, const char* what) {
    require(std::isfinite(f) && std::abs(f) <= nyquist * (1.0 + 1e-12),
            std::string(what) + " lies beyond the Nyquist limit");
}

void scale_to_power(std::vector<std::complex<double>>& x, double target_power) {
    double p = 0.0;
    for (const auto& s : x) p += std::norm(s);
    p /= static_cast<double>(x.size());
    if (p <= 0.0) return;
    const double g = std::sqrt(target_power / p);
    for (auto& s : x) s *= g;
}

std::vector<std::complex<double>> make_am(const SynthParams& p, std::size_t n, Rng& rng) {
    const double phase_c = rng.uniform(0.0, kTwoPi);
    const double phase_m = rng.uniform(0.0, kTwoPi);
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / p.sample_rate_hz;
        const double env = 1.0 + p.am.mod_index * std::cos(kTwoPi * p.am.mod_rate_hz * t + phase_m);
        x[i] = std::polar(env, kTwoPi * p.am.carrier_offset_hz * t + phase_c);
    }
    return x;
}

// Quadratic phase inside each sweep; the phase reached at the end of a
// sweep carries into the next one, so the waveform never jumps at the wrap.
std::vector<std::complex<double>> make_chirp(const SynthParams& p, std::size_t n, Rng& rng) {
    const double phase0 = rng.uniform(0.0, kTwoPi);
    const double period = p.chirp.sweep_period_s;
    const double f0 = p.chirp.f_start_hz;
    const double rate = (p.chirp.f_end_hz - f0) / period;
    const double per_sweep = std::fmod(kTwoPi * period * 0.5 * (f0 + p.chirp.f_end_hz), kTwoPi);
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / p.sample_rate_hz;
        const double m = std::floor(t / period);
        const double tau = t - m * period;
        const double carried = std::fmod(m * per_sweep, kTwoPi);
        x[i] = std::polar(1.0, phase0 + carried + kTwoPi * (f0 * tau + 0.5 * rate * tau * tau));
    }
    return x;
}

std::vector<std::complex<double>> make_fm(const SynthParams& p, std::size_t n, Rng& rng) {
    const double phase_c = rng.uniform(0.0, kTwoPi);
    const double phase_m = rng.uniform(0.0, kTwoPi);
    const double beta = p.fm.freq_dev_hz / p.fm.mod_rate_hz;
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / p.sample_rate_hz;
        const double phi = kTwoPi * p.fm.carrier_offset_hz * t + beta * std::sin(kTwoPi * p.fm.mod_rate_hz * t + phase_m);
        x[i] = std::polar(1.0, phi + phase_c);
    }
    return x;
}

std::vector<std::complex<double>> make_nb(const SynthParams& p, std::size_t n, Rng& rng) {
    const auto taps = nb_bandpass_taps(p.nb.center_hz, p.nb.bandwidth_hz, p.sample_rate_hz);
    const auto src = complex_noise(n + taps.size() - 1, rng);
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> acc{};
        for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * src[i + taps.size() - 1 - k];
        x[i] = acc;
    }
    return x;
}

std::vector<std::complex<double>> make_dme(const SynthParams& p, std::size_t n, Rng& rng) {
    const double fs = p.sample_rate_hz;
    const double duration = static_cast<double>(n) / fs;
    const double sigma = p.dme.pulse_width_s / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const double spacing = p.dme.pulse_pair_spacing_s;
    const double reach = 5.0 * sigma;

    std::vector<double> starts;
    for (double t = -(spacing + reach) + rng.exponential(p.dme.pair_rate_hz); t < duration + reach;
         t += rng.exponential(p.dme.pair_rate_hz)) {
        starts.push_back(t);
    }
    // A Poisson draw can leave the window empty; keep one pair so the class
    // is never indistinguishable from noise.
    const bool any_visible = std::any_of(starts.begin(), starts.end(), [&](double s) {
        return s + spacing + reach > 0.0 && s - reach < duration;
    });
    if (!any_visible) starts.assign(1, rng.uniform(0.0, std::max(duration - spacing, 0.0)));

    std::vector<std::complex<double>> x(n);
    for (double t0 : starts) {
        const std::complex<double> rot = std::polar(1.0, rng.uniform(0.0, kTwoPi));
        for (double centre : {t0, t0 + spacing}) {
            const auto lo = static_cast<long long>(std::ceil((centre - reach) * fs));
            const auto hi = static_cast<long long>(std::floor((centre + reach) * fs));
            for (long long i = std::max(lo, 0LL); i <= hi && i < static_cast<long long>(n); ++i) {
                const double dt = static_cast<double>(i) / fs - centre;
                x[static_cast<std::size_t>(i)] += rot * std::exp(-0.5 * dt * dt / (sigma * sigma));
            }
        }
    }
    return x;
}

std::vector<std::complex<double>> make_gnss(const SynthParams& p, std::size_t n, Rng& rng) {
    const double samples_per_chip = std::max(1.0, p.sample_rate_hz / p.gnss.chip_rate_hz);
    const double amp = std::sqrt(std::pow(10.0, p.gnss.power_db / 10.0));
    std::vector<std::complex<double>> x(n);
    long long current_chip = -1;
    double value = amp;
    for (std::size_t i = 0; i < n; ++i) {
        const auto chip = static_cast<long long>(std::floor(static_cast<double>(i) / samples_per_chip));
        if (chip != current_chip) {
            current_chip = chip;
            value = (rng.next_u64() >> 63) ? amp : -amp;
        }
        x[i] = {value, 0.0};
    }
    return x;
}

std::vector<std::complex<double>> jammer_waveform(JamClass cls, const SynthParams& p, std::size_t n,
                                                  std::uint64_t seed) {
    Rng rng(derive_seed(seed, "jammer"));
    std::vector<std::complex<double>> x;
    switch (cls) {
        case JamClass::NoJam: return make_gnss(p, n, rng);
        case JamClass::SingleAM: x = make_am(p, n, rng); break;
        case JamClass::SingleChirp: x = make_chirp(p, n, rng); break;
        case JamClass::SingleFM: x = make_fm(p, n, rng); break;
        case JamClass::NB: x = make_nb(p, n, rng); break;
        case JamClass::DME: x = make_dme(p, n, rng); break;
    }
    scale_to_power(x, std::pow(10.0, p.jsr_db / 10.0));
    return x;
}

}  // namespace

std::string_view to_string(JamClass c) noexcept { return kNames[static_cast<std::size_t>(c)]; }

std::optional<JamClass> parse_jam_class(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (iequals(name, kNames[i])) return static_cast<JamClass>(i);
    return std::nullopt;
}

JamClass jam_class_from_string(std::string_view name) {
    if (auto c = parse_jam_class(name)) return *c;
    std::string msg = "unknown jamming class '" + std::string(name) + "'; valid classes:";
    for (auto n : kNames) msg += " " + std::string(n);
    throw UsageError(msg);
}

JamClass jam_class_from_code(int code) {
    if (code < 0 || code >= kJamClassCount) throw DataError("jamming class code out of range: " + std::to_string(code));
    return static_cast<JamClass>(code);
}

SynthParams SynthParams::defaults(double fs, double duration_s, double jsr_db) {
    SynthParams p;
    p.duration_s = duration_s;
    p.sample_rate_hz = fs;
    p.jsr_db = jsr_db;
    p.am = {fs / 8.0, 0.8, 1e3};
    p.chirp = {-fs / 2.0, fs / 2.0, 1e-3};
    p.fm = {-fs / 8.0, 0.05 * fs, 1e3};
    p.nb = {fs / 16.0, 0.08 * fs};
    p.dme = {12e-6, 3.5e-6, 2700.0};
    p.gnss = {1.023e6, -20.0};
    return p;
}

void validate(JamClass cls, const SynthParams& p) {
    require(std::isfinite(p.duration_s) && p.duration_s > 0.0, "duration_s must be positive");
    require(std::isfinite(p.sample_rate_hz) && p.sample_rate_hz > 0.0, "sample_rate_hz must be positive");
    require(std::isfinite(p.jsr_db), "jsr_db must be finite");
    require(sample_count(p) > 0, "duration_s x sample_rate_hz rounds to zero samples");
    const double nyq = p.sample_rate_hz / 2.0;
    switch (cls) {
        case JamClass::NoJam:
            require(p.gnss.chip_rate_hz > 0.0, "gnss chip_rate_hz must be positive");
            require(std::isfinite(p.gnss.power_db), "gnss power_db must be finite");
            break;
        case JamClass::SingleAM:
            require(p.am.mod_index > 0.0 && p.am.mod_index <= 1.0, "AM mod_index must lie in (0, 1]");
            require(p.am.mod_rate_hz > 0.0, "AM mod_rate_hz must be positive");
            require_in_band(std::abs(p.am.carrier_offset_hz) + p.am.mod_rate_hz, nyq, "AM carrier plus sideband");
            break;
        case JamClass::SingleChirp:
            require_in_band(p.chirp.f_start_hz, nyq, "chirp f_start_hz");
            require_in_band(p.chirp.f_end_hz, nyq, "chirp f_end_hz");
            require(p.chirp.sweep_period_s > 0.0, "chirp sweep_period_s must be positive");
            break;
        case JamClass::SingleFM:
            require(p.fm.freq_dev_hz > 0.0, "FM freq_dev_hz must be positive");
            require(p.fm.mod_rate_hz > 0.0, "FM mod_rate_hz must be positive");
            require_in_band(std::abs(p.fm.carrier_offset_hz) + p.fm.freq_dev_hz, nyq, "FM carrier plus deviation");
            break;
        case JamClass::NB:
            require(p.nb.bandwidth_hz > 0.0, "NB bandwidth_hz must be positive");
            require_in_band(std::abs(p.nb.center_hz) + p.nb.bandwidth_hz / 2.0, nyq, "NB band edge");
            break;
        case JamClass::DME:
            require(p.dme.pulse_width_s > 0.0, "DME pulse_width_s must be positive");
            require(p.dme.pulse_width_s < p.dme.pulse_pair_spacing_s,
                    "DME pulse_width_s must be smaller than pulse_pair_spacing_s");
            require(p.dme.pair_rate_hz > 0.0, "DME pair_rate_hz must be positive");
            break;
    }
}

std::size_t sample_count(const SynthParams& p) {
    const double n = std::round(p.duration_s * p.sample_rate_hz);
    return n > 0.0 && std::isfinite(n) ? static_cast<std::size_t>(n) : 0;
}

double IqSignal::mean_power() const noexcept {
    if (samples.empty()) return 0.0;
    double p = 0.0;
    for (const auto& s : samples) p += std::norm(s);
    return p / static_cast<double>(samples.size());
}

std::vector<std::complex<double>> complex_noise(std::size_t n, Rng& rng) {
    std::vector<std::complex<double>> x(n);
    const double s = std::sqrt(0.5);
    for (auto& v : x) {
        const double re = rng.normal();
        const double im = rng.normal();
        v = {s * re, s * im};
    }
    return x;
}

std::vector<std::complex<double>> nb_bandpass_taps(double center_hz, double bandwidth_hz, double fs) {
    // The Hamming transition band (about 3.3 fs / taps wide) is placed inside
    // the nominal band so the passband edge, not the skirt, sits at +-bw/2.
    const double transition = 3.3 * fs / static_cast<double>(kNbTaps);
    const double cutoff = std::max(bandwidth_hz / 2.0 - transition / 2.0, bandwidth_hz / 4.0);
    const double fc = cutoff / fs;
    const double mid = (static_cast<double>(kNbTaps) - 1.0) / 2.0;
    std::vector<std::complex<double>> h(kNbTaps);
    double dc = 0.0;
    std::vector<double> lp(kNbTaps);
    for (std::size_t i = 0; i < kNbTaps; ++i) {
        const double m = static_cast<double>(i) - mid;
        const double arg = kTwoPi * fc * m;
        const double sinc = std::abs(arg) < 1e-12 ? 2.0 * fc : std::sin(arg) / (std::numbers::pi * m);
        const double w = 0.54 - 0.46 * std::cos(kTwoPi * static_cast<double>(i) / (static_cast<double>(kNbTaps) - 1.0));
        lp[i] = sinc * w;
        dc += lp[i];
    }
    for (std::size_t i = 0; i < kNbTaps; ++i)
        h[i] = std::polar(lp[i] / dc, kTwoPi * center_hz / fs * static_cast<double>(i));
    return h;
}

IqSignal jammer_only(JamClass cls, const SynthParams& params, std::uint64_t seed) {
    validate(cls, params);
    IqSignal sig;
    sig.sample_rate_hz = params.sample_rate_hz;
    sig.label = cls;
    sig.seed = seed;
    sig.samples = jammer_waveform(cls, params, sample_count(params), seed);
    return sig;
}

IqSignal synth_signal(JamClass cls, const SynthParams& params, std::uint64_t seed) {
    IqSignal sig = jammer_only(cls, params, seed);
    Rng noise_rng(derive_seed(seed, "noise"));
    const auto noise = complex_noise(sig.samples.size(), noise_rng);
    for (std::size_t i = 0; i < noise.size(); ++i) sig.samples[i] += noise[i];
    return sig;
}

SynthParams random_params(JamClass cls, double fs, double duration_s, const RandomizationRanges& r, Rng& rng) {
    SynthParams p = SynthParams::defaults(fs, duration_s, rng.uniform(r.jsr_min_db, r.jsr_max_db));
    const double nyq = fs / 2.0;
    switch (cls) {
        case JamClass::NoJam: break;
        case JamClass::SingleAM:
            p.am.mod_index = rng.uniform(0.3, 1.0);
            p.am.mod_rate_hz = rng.uniform(0.5e3, 20e3);
            p.am.carrier_offset_hz = rng.uniform(-0.45, 0.45) * fs;
            break;
        case JamClass::SingleChirp: {
            const double width = rng.uniform(0.3, 1.0) * fs;
            const double lo = rng.uniform(-nyq, nyq - width);
            const bool up = rng.uniform() < 0.5;
            p.chirp.f_start_hz = up ? lo : lo + width;
            p.chirp.f_end_hz = up ? lo + width : lo;
            p.chirp.sweep_period_s = rng.uniform(0.2, 1.0) * duration_s;
            break;
        }
        case JamClass::SingleFM:
            p.fm.freq_dev_hz = rng.uniform(0.02, 0.08) * fs;
            p.fm.mod_rate_hz = rng.uniform(1.5, 6.0) / duration_s;
            p.fm.carrier_offset_hz = rng.uniform(-1.0, 1.0) * (0.45 * fs - p.fm.freq_dev_hz);
            break;
        case JamClass::NB:
            p.nb.bandwidth_hz = rng.uniform(0.06, 0.15) * fs;
            p.nb.center_hz = rng.uniform(-1.0, 1.0) * (0.45 * fs - p.nb.bandwidth_hz / 2.0);
            break;
        case JamClass::DME:
            p.dme.pulse_pair_spacing_s = rng.uniform(0.9, 1.1) * 12e-6;
            p.dme.pulse_width_s = rng.uniform(0.85, 1.15) * 3.5e-6;
            p.dme.pair_rate_hz = rng.uniform(5.0, 30.0) / duration_s;
            break;
    }
    return p;
}

}  // namespace gnss::synth

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

#include "gnss/synth/iq_file.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "gnss/core/error.hpp"

namespace gnss::synth {

namespace {

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
    using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

template <typename T>
T get_le(const unsigned char* p) {
    using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(p[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

std::size_t write_giq(const std::filesystem::path& path, const IqSignal& signal) {
    std::vector<unsigned char> buf;
    buf.reserve(kGiqHeaderBytes + 8 * signal.samples.size());
    buf.insert(buf.end(), {'G', 'I', 'Q', '1'});
    put_le<std::uint16_t>(buf, kGiqVersion);
    buf.push_back(static_cast<unsigned char>(signal.label));
    buf.push_back(0);
    put_le<double>(buf, signal.sample_rate_hz);
    for (const auto& s : signal.samples) {
        put_le<float>(buf, static_cast<float>(s.real()));
        put_le<float>(buf, static_cast<float>(s.imag()));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write IQ file: " + path.string());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("short write on IQ file: " + path.string());
    return buf.size();
}

IqSignal read_giq(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open IQ file: " + path.string());
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < kGiqHeaderBytes || std::memcmp(buf.data(), "GIQ1", 4) != 0)
        throw DataError("not a GIQ1 file: " + path.string());
    const auto version = get_le<std::uint16_t>(buf.data() + 4);
    if (version != kGiqVersion) throw DataError("unsupported GIQ version " + std::to_string(version));
    if ((buf.size() - kGiqHeaderBytes) % 8 != 0) throw DataError("truncated GIQ payload: " + path.string());
    IqSignal sig;
    sig.label = jam_class_from_code(buf[6]);
    sig.sample_rate_hz = get_le<double>(buf.data() + 8);
    const std::size_t n = (buf.size() - kGiqHeaderBytes) / 8;
    sig.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* p = buf.data() + kGiqHeaderBytes + 8 * i;
        sig.samples[i] = {get_le<float>(p), get_le<float>(p + 4)};
    }
    return sig;
}

void write_sidecar(const std::filesystem::path& path, const IqSidecar& meta) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write sidecar: " + path.string());
    out << "class=" << to_string(meta.label) << '\n'
        << "seed=" << meta.seed << '\n'
        << "jsr_db=" << format_double(meta.jsr_db) << '\n'
        << "duration_s=" << format_double(meta.duration_s) << '\n';
}

IqSidecar read_sidecar(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open sidecar: " + path.string());
    IqSidecar meta;
    bool have_class = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("malformed sidecar line: " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            if (key == "class") {
                meta.label = jam_class_from_string(value);
                have_class = true;
            } else if (key == "seed") {
                meta.seed = std::stoull(value);
            } else if (key == "jsr_db") {
                meta.jsr_db = std::stod(value);
            } else if (key == "duration_s") {
                meta.duration_s = std::stod(value);
            }
        } catch (const std::logic_error&) {
            throw DataError("bad sidecar value for '" + key + "': " + value);
        }
    }
    if (!have_class) throw DataError("sidecar lacks class: " + path.string());
    return meta;
}

std::filesystem::path sidecar_path(const std::filesystem::path& iq_path) {
    auto p = iq_path;
    p += ".meta";
    return p;
}

}  // namespace gnss::synth

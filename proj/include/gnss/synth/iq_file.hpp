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

#include <filesystem>
#include <map>
#include <string>

#include "gnss/synth/signal_synth.hpp"

namespace gnss::synth {

// GIQ1 binary layout, all little-endian:
//   0  magic "GIQ1"         4 bytes
//   4  version              u16 (= 1)
//   6  label                u8 (JamClass code)
//   7  pad                  u8 (= 0)
//   8  sample_rate_hz       IEEE-754 binary64
//  16  samples              float32 I, float32 Q, ...
inline constexpr std::uint16_t kGiqVersion = 1;
inline constexpr std::size_t kGiqHeaderBytes = 16;

struct IqSidecar {
    JamClass label = JamClass::NoJam;
    std::uint64_t seed = 0;
    double jsr_db = 0.0;
    double duration_s = 0.0;
};

/// Writes samples (narrowed to float32) and returns the bytes written.
std::size_t write_giq(const std::filesystem::path& path, const IqSignal& signal);

/// Reads a GIQ1 file. The seed is not part of the binary format and is
/// left at 0; read it from the sidecar.
IqSignal read_giq(const std::filesystem::path& path);

/// key=value lines: class, seed, jsr_db, duration_s.
void write_sidecar(const std::filesystem::path& path, const IqSidecar& meta);
IqSidecar read_sidecar(const std::filesystem::path& path);

/// Conventional sidecar path for an IQ file: "<file>.meta".
std::filesystem::path sidecar_path(const std::filesystem::path& iq_path);

}  // namespace gnss::synth
